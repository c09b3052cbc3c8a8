//! Measured similarity certificates built from resolvent data.
//!
//! Every routine here turns one textbook criterion into a finite
//! computation with an explicit report:
//!
//! * [`resolvent_profile`] samples `dist(lambda, curve) * ||(T - lambda)^-1||`
//!   on a tube of dyadic distance levels around the curve and keeps the
//!   per-side suprema.
//! * [`mean_square`] integrates `||(T - lambda)^-1 x||^2` along a family of
//!   curves collapsing onto the boundary and fits how the scaled integrals
//!   grow as the curves shrink.
//! * [`meansquare_implies_pointwise_check`] measures the constant linking
//!   the two estimates on a common side.
//! * [`char_fn`] and [`nf_criterion`] evaluate the characteristic function
//!   of a contraction on its defect space and bound its inverse over the
//!   open disk.
//! * [`rho_tests`], [`power_bounded_check`], and [`similarity_diagnostic`]
//!   cover the operator-radius, power-boundedness, and direct
//!   diagonalization routes.
//!
//! Reports are plain serializable structs, ordered by grid index, and
//! deterministic for a fixed probe seed.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curves::{CurveError, CurveFamily, FamilySide, JordanCurve, Side};
use crate::linalg::{
    eigenvalues, hermitian_eigen, operator_norm, resolvent_norm, sigma_min, spectrum, vec_norm,
    ComplexMatrix, LinalgError, Lu,
};
use crate::par::par_map;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Partial sums are always accumulated over this many index blocks, so
/// results do not depend on the worker count.
const REDUCTION_BLOCKS: usize = 64;

/// Relative distance at which an eigenvalue counts as sitting on the curve.
const ON_CURVE_TOL: f64 = 1e-6;

/// Absolute floor on the distance between an integration node and the
/// spectrum, relative to the operator scale.
const SINGULARITY_FLOOR: f64 = 1e-12;

/// Rank cutoff on the singular values of a defect operator.
const DEFECT_RANK_TOL: f64 = 1e-10;

/// Eigenvalues of `I - T* T` below this are rounding noise from forming the
/// Gram matrix in floating point and are treated as exact zeros.
const GRAM_NOISE: f64 = 1e-14;

/// Defect eigenvalues of a nominal contraction may undershoot zero by
/// rounding; anything below this is a genuine norm violation.
const DEFECT_NEG_CLAMP: f64 = 1e-7;

/// Powers larger than this abort the power-boundedness sweep.
const POWER_CEILING: f64 = 1e12;

/// Margin tolerance for the operator-radius tests.
const RHO_TOL: f64 = 1e-9;

/// Everything that can go wrong while evaluating a criterion.
#[derive(Debug, Error)]
pub enum CriteriaError {
    #[error("eigenvalue {eigenvalue} lies {distance:.3e} away from the reference curve")]
    SpectrumOffCurve {
        eigenvalue: Complex64,
        distance: f64,
    },
    #[error("integration node {lambda} is within {floor:.3e} of the spectrum")]
    SingularResolvent { lambda: Complex64, floor: f64 },
    #[error("operator norm {norm:.8} exceeds one beyond tolerance")]
    NotAContraction { norm: f64 },
    #[error("I - lambda T* is numerically singular at lambda = {lambda}")]
    SingularFactor { lambda: Complex64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Curve(#[from] CurveError),
}

/// Decision thresholds shared by the verdict-producing routines.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Thresholds {
    /// Mean-square growth exponents at or below this magnitude certify.
    pub growth_cut: f64,
    /// Diagonalizer condition numbers above this flag the similarity as
    /// ill conditioned.
    pub kappa_cut: f64,
    /// Profile constants within this of one flag a normality candidate.
    pub stampfli_tol: f64,
    /// Allowed overshoot of the operator norm above one for contractions.
    pub contraction_tol: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            growth_cut: 0.5,
            kappa_cut: 1e6,
            stampfli_tol: 1e-6,
            contraction_tol: 1e-8,
        }
    }
}

/// Probe vectors for vector-valued estimates: the full standard basis plus
/// a fixed number of seeded random unit vectors.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProbeSpec {
    pub random: usize,
    pub seed: u64,
}

impl Default for ProbeSpec {
    fn default() -> Self {
        ProbeSpec {
            random: 8,
            seed: 0x5EED,
        }
    }
}

/// Materialize the probe set for dimension `n`.
pub fn probe_vectors(n: usize, spec: &ProbeSpec) -> Vec<Vec<Complex64>> {
    let mut probes = Vec::with_capacity(n + spec.random);
    for k in 0..n {
        let mut e = vec![Complex64::default(); n];
        e[k] = ONE;
        probes.push(e);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    for _ in 0..spec.random {
        let mut x: Vec<Complex64> = (0..n)
            .map(|_| {
                Complex64::new(rng.gen::<f64>() * 2.0 - 1.0, rng.gen::<f64>() * 2.0 - 1.0)
            })
            .collect();
        let norm = vec_norm(&x).max(f64::MIN_POSITIVE);
        for v in &mut x {
            *v /= norm;
        }
        probes.push(x);
    }
    probes
}

// ---------------------------------------------------------------------------
// Pointwise tube profile
// ---------------------------------------------------------------------------

/// Sampling plan for [`resolvent_profile`]: `angular` points per level and
/// side, at distances `d_max * 2^-j`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProfileGrid {
    pub angular: usize,
    pub levels: usize,
    /// Outermost tube distance. `None` picks 40% of the curve's reach.
    pub d_max: Option<f64>,
}

impl Default for ProfileGrid {
    fn default() -> Self {
        ProfileGrid {
            angular: 25,
            levels: 4,
            d_max: None,
        }
    }
}

/// One tube sample.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ProfileSample {
    pub lambda: Complex64,
    /// Measured distance from `lambda` to the curve.
    pub dist: f64,
    /// `||(T - lambda)^-1||`.
    pub norm: f64,
    pub side: Side,
    /// Index of the dyadic distance level the sample belongs to.
    pub level: usize,
}

/// Suprema of `dist * ||(T - lambda)^-1||` over a two-sided tube grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResolventProfile {
    pub samples: Vec<ProfileSample>,
    /// The dyadic distance levels, outermost first.
    pub levels: Vec<f64>,
    pub c_inside: f64,
    pub c_outside: f64,
    /// True when both constants sit within tolerance of one.
    pub stampfli_normal: bool,
}

impl ResolventProfile {
    /// Supremum of `dist * norm` over one side of one distance level.
    pub fn level_constant(&self, side: Side, level: usize) -> f64 {
        self.samples
            .iter()
            .filter(|s| s.side == side && s.level == level)
            .fold(0.0f64, |a, s| a.max(s.dist * s.norm))
    }
}

/// Sample `dist(lambda, curve) * ||(T - lambda)^-1||` on both sides of the
/// curve and report the per-side suprema.
///
/// The spectrum must lie on the curve; each eigenvalue contributes a
/// projection foot to the angular sample set so the supremum is attained
/// where the resolvent actually peaks, and the remaining feet are spread
/// uniformly in the curve parameter.
pub fn resolvent_profile(
    t: &ComplexMatrix,
    curve: &JordanCurve,
    grid: &ProfileGrid,
    thresholds: &Thresholds,
) -> Result<ResolventProfile, CriteriaError> {
    assert!(grid.angular >= 1 && grid.levels >= 1, "empty profile grid");
    let reach = curve.reach();
    let d_max = grid.d_max.unwrap_or(0.4 * reach);
    assert!(
        d_max > 0.0 && d_max < reach,
        "d_max must lie strictly inside the reach"
    );

    let eigs = eigenvalues(t)?;
    let scale = curve.diameter().max(1.0);
    let mut feet = Vec::new();
    for ev in &eigs {
        let pr = curve.project_flat(*ev);
        if pr.distance > ON_CURVE_TOL * scale {
            return Err(CriteriaError::SpectrumOffCurve {
                eigenvalue: *ev,
                distance: pr.distance,
            });
        }
        feet.push(pr.parameter);
    }
    feet.sort_by(|a, b| a.total_cmp(b));

    let mut params = Vec::with_capacity(grid.angular);
    if feet.len() <= grid.angular {
        params.extend_from_slice(&feet);
    } else {
        for k in 0..grid.angular {
            params.push(feet[k * feet.len() / grid.angular]);
        }
    }
    let uniform = grid.angular - params.len();
    for k in 0..uniform {
        params.push(TAU * k as f64 / uniform.max(1) as f64);
    }

    let levels: Vec<f64> = (0..grid.levels).map(|j| d_max / (1 << j) as f64).collect();

    struct Site {
        lambda: Complex64,
        level: usize,
    }
    let mut sites = Vec::with_capacity(2 * grid.levels * grid.angular);
    for (j, &d) in levels.iter().enumerate() {
        for sign in [-1.0, 1.0] {
            for &p in &params {
                let base = curve.psi(p);
                let tangent = curve.psi_t(p);
                let outward = Complex64::new(0.0, -1.0) * tangent / tangent.norm();
                sites.push(Site {
                    lambda: base + outward * (sign * d),
                    level: j,
                });
            }
        }
    }

    let computed = par_map(sites.len(), |i| -> Result<ProfileSample, CriteriaError> {
        let site = &sites[i];
        let pr = curve.project_flat(site.lambda);
        let norm = resolvent_norm(t, site.lambda)?;
        Ok(ProfileSample {
            lambda: site.lambda,
            dist: pr.distance,
            norm,
            side: pr.side,
            level: site.level,
        })
    });

    let mut samples = Vec::with_capacity(computed.len());
    for s in computed {
        samples.push(s?);
    }

    let mut c_inside = 0.0f64;
    let mut c_outside = 0.0f64;
    for s in &samples {
        let v = s.dist * s.norm;
        match s.side {
            Side::Interior => c_inside = c_inside.max(v),
            Side::Exterior => c_outside = c_outside.max(v),
            Side::OnCurve => {}
        }
    }
    let stampfli_normal = c_inside.max(c_outside) <= 1.0 + thresholds.stampfli_tol;
    Ok(ResolventProfile {
        samples,
        levels,
        c_inside,
        c_outside,
        stampfli_normal,
    })
}

// ---------------------------------------------------------------------------
// Mean-square estimates along shrinking curve families
// ---------------------------------------------------------------------------

/// Twelve log-spaced scale values on [1e-3, 1].
pub fn default_s_grid() -> Vec<f64> {
    (0..12)
        .map(|i| 1e-3f64.powf(1.0 - i as f64 / 11.0))
        .collect()
}

/// Scale grid and node budget for [`mean_square`].
///
/// Each curve at scale `s` is sampled on `max(min_nodes, ceil(60 / s))`
/// nodes, so the trapezoid rule keeps roughly sixty nodes per unit of the
/// narrowing resolvent peak.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MeanSquareGrid {
    pub s_values: Vec<f64>,
    pub min_nodes: usize,
}

impl Default for MeanSquareGrid {
    fn default() -> Self {
        MeanSquareGrid {
            s_values: default_s_grid(),
            min_nodes: 1024,
        }
    }
}

impl MeanSquareGrid {
    pub fn nodes_for(&self, s: f64) -> usize {
        self.min_nodes.max((60.0 / s).ceil() as usize)
    }
}

/// Scaled line integrals of the squared resolvent along one curve family.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MeanSquareReport {
    pub side: FamilySide,
    pub adjoint: bool,
    /// `(s, sup over probes of s * integral)` pairs, ascending in `s`.
    pub per_s: Vec<(f64, f64)>,
    /// Supremum of the scaled integrals over the grid.
    pub fitted_c: f64,
    /// Log-log slope of the scaled integrals against `1/s`, fitted on the
    /// smallest-scale half of the grid. Near zero the criterion holds;
    /// positive values mean the integrals blow up as the curves shrink.
    pub growth_exponent: f64,
}

fn log_log_slope(per_s: &[(f64, f64)]) -> f64 {
    let k = per_s.len().div_ceil(2).max(2).min(per_s.len());
    let pts = &per_s[..k];
    if pts.len() < 2 {
        return 0.0;
    }
    let xs: Vec<f64> = pts.iter().map(|(s, _)| (1.0 / s).ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|(_, v)| v.max(f64::MIN_POSITIVE).ln()).collect();
    let xm = xs.iter().sum::<f64>() / xs.len() as f64;
    let ym = ys.iter().sum::<f64>() / ys.len() as f64;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        num += (x - xm) * (y - ym);
        den += (x - xm) * (x - xm);
    }
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Integrate `s * ||(T - lambda)^-1 x||^2` over each curve of the family by
/// the trapezoid rule with arc-length weights, taking the supremum over the
/// probe set.
///
/// With `adjoint` set the criterion is applied to `T*` at the conjugated
/// points, which is the natural pairing for the opposite side of the curve.
/// Nodes that fall within the singularity floor of an eigenvalue are
/// rejected rather than silently dominating the integral.
pub fn mean_square(
    t: &ComplexMatrix,
    family: &CurveFamily,
    adjoint: bool,
    probe_spec: &ProbeSpec,
    grid: &MeanSquareGrid,
) -> Result<MeanSquareReport, CriteriaError> {
    assert!(!grid.s_values.is_empty(), "empty scale grid");
    let n = t.dim();
    let base = if adjoint { t.adjoint() } else { t.clone() };
    let probes = probe_vectors(n, probe_spec);
    let eigs = eigenvalues(t)?;
    let floor = SINGULARITY_FLOOR * t.frobenius_norm().max(1.0);

    let mut s_sorted = grid.s_values.clone();
    s_sorted.sort_by(|a, b| a.total_cmp(b));
    let mut per_s = Vec::with_capacity(s_sorted.len());

    for &s in &s_sorted {
        assert!(s > 0.0 && s <= 1.0, "scales must lie in (0, 1]");
        let nodes = grid.nodes_for(s);
        let pts = family.generate(s, nodes);
        let dtheta = TAU / nodes as f64;

        let blocks = par_map(REDUCTION_BLOCKS, |b| -> Result<Vec<f64>, CriteriaError> {
            let lo = b * nodes / REDUCTION_BLOCKS;
            let hi = (b + 1) * nodes / REDUCTION_BLOCKS;
            let mut sums = vec![0.0f64; probes.len()];
            let mut buf = vec![Complex64::default(); n];
            for pt in &pts[lo..hi] {
                let lambda = pt.point;
                let gap = eigs
                    .iter()
                    .fold(f64::INFINITY, |a, ev| a.min((lambda - ev).norm()));
                if gap <= floor {
                    return Err(CriteriaError::SingularResolvent { lambda, floor });
                }
                let shift = if adjoint { lambda.conj() } else { lambda };
                let lu = Lu::factor(&base.shift(shift));
                if lu.min_pivot() == 0.0 {
                    return Err(CriteriaError::SingularResolvent { lambda, floor });
                }
                let weight = pt.tangent.norm() * dtheta;
                for (sums_k, probe) in sums.iter_mut().zip(&probes) {
                    buf.copy_from_slice(probe);
                    lu.solve_in_place(&mut buf);
                    let nrm = vec_norm(&buf);
                    *sums_k += nrm * nrm * weight;
                }
            }
            Ok(sums)
        });

        let mut totals = vec![0.0f64; probes.len()];
        for block in blocks {
            for (t_k, b_k) in totals.iter_mut().zip(block?) {
                *t_k += b_k;
            }
        }
        let sup = totals.iter().fold(0.0f64, |a, v| a.max(*v));
        per_s.push((s, s * sup));
    }

    let fitted_c = per_s.iter().fold(0.0f64, |a, (_, v)| a.max(*v));
    let growth_exponent = log_log_slope(&per_s);
    Ok(MeanSquareReport {
        side: family.side,
        adjoint,
        per_s,
        fitted_c,
        growth_exponent,
    })
}

/// Ratio of the fitted mean-square constants of two families of the same
/// curve: `fitted_c(B) / fitted_c(A)`.
///
/// Values of order one mean the criterion does not depend on which
/// admissible family was chosen.
pub fn cross_family_stability(
    t: &ComplexMatrix,
    family_a: &CurveFamily,
    family_b: &CurveFamily,
    adjoint: bool,
    probe_spec: &ProbeSpec,
    grid: &MeanSquareGrid,
) -> Result<f64, CriteriaError> {
    let a = mean_square(t, family_a, adjoint, probe_spec, grid)?;
    let b = mean_square(t, family_b, adjoint, probe_spec, grid)?;
    Ok(b.fitted_c / a.fitted_c)
}

/// One distance level of the pointwise-versus-mean-square comparison.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct LinkSample {
    pub distance: f64,
    /// Supremum of `dist * norm` over the profile samples at this level on
    /// the family's side.
    pub pointwise: f64,
    /// `sqrt(fitted_c / distance)`, the scale the mean-square bound allows.
    pub prediction: f64,
}

/// Outcome of checking that a passed mean-square estimate controls the
/// pointwise constants.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PointwiseLinkReport {
    /// False when the mean-square criterion itself failed, in which case no
    /// pointwise conclusion is claimed.
    pub applicable: bool,
    pub growth_exponent: f64,
    pub fitted_c: f64,
    pub per_level: Vec<LinkSample>,
    /// Smallest constant `k` with `pointwise <= k * prediction` across the
    /// sampled levels; `None` when not applicable.
    pub link_constant: Option<f64>,
}

/// Compare a tube profile against the mean-square bound on the same side.
///
/// Runs the mean-square criterion on the family first; when its growth
/// exponent stays under the threshold, each profile level's pointwise
/// constant is divided by `sqrt(fitted_c / distance)` and the largest ratio
/// is reported as the empirical link constant.
pub fn meansquare_implies_pointwise_check(
    t: &ComplexMatrix,
    family: &CurveFamily,
    profile: &ResolventProfile,
    probe_spec: &ProbeSpec,
    grid: &MeanSquareGrid,
    thresholds: &Thresholds,
) -> Result<PointwiseLinkReport, CriteriaError> {
    let ms = mean_square(t, family, false, probe_spec, grid)?;
    let side = match family.side {
        FamilySide::Inside => Side::Interior,
        FamilySide::Outside => Side::Exterior,
    };
    let mut per_level = Vec::with_capacity(profile.levels.len());
    for (j, &d) in profile.levels.iter().enumerate() {
        per_level.push(LinkSample {
            distance: d,
            pointwise: profile.level_constant(side, j),
            prediction: (ms.fitted_c / d).sqrt(),
        });
    }
    let applicable = ms.growth_exponent.abs() <= thresholds.growth_cut;
    let link_constant = applicable.then(|| {
        per_level
            .iter()
            .filter(|l| l.prediction > 0.0)
            .fold(0.0f64, |a, l| a.max(l.pointwise / l.prediction))
    });
    Ok(PointwiseLinkReport {
        applicable,
        growth_exponent: ms.growth_exponent,
        fitted_c: ms.fitted_c,
        per_level,
        link_constant,
    })
}

// ---------------------------------------------------------------------------
// Characteristic function of a contraction
// ---------------------------------------------------------------------------

/// Characteristic function of a contraction, represented on orthonormal
/// bases of the two defect spaces.
///
/// The defect operators are `D = (I - T* T)^1/2` and `D* = (I - T T*)^1/2`;
/// their ranges carry the function
/// `Theta(lambda) = -T + lambda D* (I - lambda T*)^-1 D`, which is what the
/// similarity-to-unitary criterion bounds. Both defect spaces of a square
/// matrix have the same dimension, so the representation is square.
pub struct CharacteristicFunction {
    t: ComplexMatrix,
    t_adj: ComplexMatrix,
    defect: ComplexMatrix,
    defect_adj: ComplexMatrix,
    basis: Vec<Vec<Complex64>>,
    basis_adj: Vec<Vec<Complex64>>,
}

fn hermitize(m: &ComplexMatrix) -> ComplexMatrix {
    let mut h = m.add(&m.adjoint()).scale(Complex64::new(0.5, 0.0));
    for i in 0..m.dim() {
        let v = h.get(i, i);
        h.set(i, i, Complex64::new(v.re, 0.0));
    }
    h
}

/// Square root and range basis of `I - A* A` for a nominal contraction `A`.
fn defect_data(
    gram: &ComplexMatrix,
    norm_hint: f64,
) -> Result<(ComplexMatrix, Vec<Vec<Complex64>>), CriteriaError> {
    let n = gram.dim();
    let (mut vals, q) = hermitian_eigen(&hermitize(gram))?;
    if let Some(bad) = vals.iter().find(|v| **v < -DEFECT_NEG_CLAMP) {
        return Err(CriteriaError::NotAContraction {
            norm: norm_hint.max((1.0 - bad).sqrt()),
        });
    }
    for v in &mut vals {
        if *v < GRAM_NOISE {
            *v = 0.0;
        }
    }
    let mut root = ComplexMatrix::zeros(n);
    for (i, v) in vals.iter().enumerate() {
        root.set(i, i, Complex64::new(v.max(0.0).sqrt(), 0.0));
    }
    let defect = q.matmul(&root).matmul(&q.adjoint());
    let mut basis = Vec::new();
    for (i, v) in vals.iter().enumerate() {
        if v.max(0.0).sqrt() > DEFECT_RANK_TOL {
            basis.push((0..n).map(|r| q.get(r, i)).collect());
        }
    }
    Ok((defect, basis))
}

impl CharacteristicFunction {
    pub fn new(t: &ComplexMatrix) -> Result<Self, CriteriaError> {
        let norm = operator_norm(t);
        if norm > 1.0 + Thresholds::default().contraction_tol {
            return Err(CriteriaError::NotAContraction { norm });
        }
        let t_adj = t.adjoint();
        let n = t.dim();
        let id = ComplexMatrix::identity(n);
        let (defect, basis) = defect_data(&id.sub(&t_adj.matmul(t)), norm)?;
        let (defect_adj, basis_adj) = defect_data(&id.sub(&t.matmul(&t_adj)), norm)?;
        assert_eq!(
            basis.len(),
            basis_adj.len(),
            "defect spaces of a square matrix must have equal dimension"
        );
        Ok(CharacteristicFunction {
            t: t.clone(),
            t_adj,
            defect,
            defect_adj,
            basis,
            basis_adj,
        })
    }

    /// Dimension of the defect spaces; zero exactly for a unitary.
    pub fn defect_dimension(&self) -> usize {
        self.basis.len()
    }

    /// Orthonormal basis of the range of `D`, as columns.
    pub fn basis(&self) -> &[Vec<Complex64>] {
        &self.basis
    }

    /// Orthonormal basis of the range of `D*`, as columns.
    pub fn basis_adj(&self) -> &[Vec<Complex64>] {
        &self.basis_adj
    }

    /// Evaluate the characteristic function at a point of the open disk.
    pub fn evaluate(&self, lambda: Complex64) -> Result<ComplexMatrix, CriteriaError> {
        assert!(lambda.norm() < 1.0, "characteristic function needs |lambda| < 1");
        let k = self.basis.len();
        if k == 0 {
            return Ok(ComplexMatrix::zeros(0));
        }
        let n = self.t.dim();
        let id = ComplexMatrix::identity(n);
        let lu = Lu::factor(&id.sub(&self.t_adj.scale(lambda)));
        if lu.min_pivot() == 0.0 {
            return Err(CriteriaError::SingularFactor { lambda });
        }
        let solved = lu.solve_matrix(&self.defect);
        let full = self
            .t
            .scale(-ONE)
            .add(&self.defect_adj.matmul(&solved).scale(lambda));
        let images: Vec<Vec<Complex64>> =
            self.basis.iter().map(|b| full.mul_vec(b)).collect();
        Ok(ComplexMatrix::from_fn(k, |i, j| {
            self.basis_adj[i]
             .iter()
                .zip(&images[j])
                .map(|(b, y)| b.conj() * y)
                .sum()
        }))
    }
}

/// One-shot evaluation of the characteristic function.
pub fn char_fn(t: &ComplexMatrix, lambda: Complex64) -> Result<ComplexMatrix, CriteriaError> {
    CharacteristicFunction::new(t)?.evaluate(lambda)
}

/// Radial-angular sampling of the open unit disk, stopping short of the
/// boundary by `edge_margin`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DiskGrid {
    pub radial: usize,
    pub angular: usize,
    pub edge_margin: f64,
}

impl Default for DiskGrid {
    fn default() -> Self {
        DiskGrid {
            radial: 24,
            angular: 64,
            edge_margin: 1e-2,
        }
    }
}

impl DiskGrid {
    pub fn points(&self) -> Vec<Complex64> {
        let mut pts = Vec::with_capacity(self.radial * self.angular);
        for i in 0..self.radial {
            let r = (1.0 - self.edge_margin) * (i + 1) as f64 / self.radial as f64;
            for j in 0..self.angular {
                pts.push(Complex64::from_polar(r, TAU * j as f64 / self.angular as f64));
            }
        }
        pts
    }
}

/// Bound on the inverse of the characteristic function over a disk grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CharFnReport {
    pub grid: Vec<Complex64>,
    /// Supremum of `||Theta(lambda)^-1||` over the grid.
    pub sup_inv_norm: f64,
    /// True when the function is invertible on the whole sampled disk.
    pub invertible_everywhere: bool,
    /// True for a unitary, whose characteristic function lives on a
    /// zero-dimensional space and is vacuously invertible.
    pub empty_defect: bool,
    /// Interior eigenvalues of the operator, which are exactly the points
    /// where the determinant of the characteristic function vanishes.
    pub singular_points: Vec<Complex64>,
}

/// Evaluate the similarity-to-unitary criterion: the characteristic
/// function must be invertible on the open disk with a bounded inverse.
///
/// The supremum of the inverse norm is measured on the grid; invertibility
/// is decided from the zero set of the determinant, which for a matrix is
/// its spectrum inside the sampled disk. An eigenvalue closer to the origin
/// than `1 - edge_margin` therefore fails the criterion even when the grid
/// happens to dodge it.
pub fn nf_criterion(t: &ComplexMatrix, grid: &DiskGrid) -> Result<CharFnReport, CriteriaError> {
    let cf = CharacteristicFunction::new(t)?;
    if cf.defect_dimension() == 0 {
        return Ok(CharFnReport {
            grid: Vec::new(),
            sup_inv_norm: 0.0,
            invertible_everywhere: true,
            empty_defect: true,
            singular_points: Vec::new(),
        });
    }
    let points = grid.points();
    let sups = par_map(points.len(), |i| -> Result<f64, CriteriaError> {
        let rep = cf.evaluate(points[i])?;
        let sig = sigma_min(&rep);
        Ok(if sig == 0.0 { f64::INFINITY } else { 1.0 / sig })
    });
    let mut sup_inv_norm = 0.0f64;
    for s in sups {
        sup_inv_norm = sup_inv_norm.max(s?);
    }
    let singular_points: Vec<Complex64> = eigenvalues(t)?
        .into_iter()
        .filter(|ev| ev.norm() < 1.0 - grid.edge_margin)
        .collect();
    Ok(CharFnReport {
        grid: points,
        sup_inv_norm,
        invertible_everywhere: singular_points.is_empty() && sup_inv_norm.is_finite(),
        empty_defect: false,
        singular_points,
    })
}

// ---------------------------------------------------------------------------
// Operator-radius tests
// ---------------------------------------------------------------------------

/// One resolvent sample of the annulus test.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct BandSample {
    pub lambda: Complex64,
    pub norm: f64,
    pub bound: f64,
}

/// Measured margins of the two operator-radius tests.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RhoReport {
    pub rho: f64,
    /// `min over theta of lambda_min(I - Re(e^{i theta} T))`; nonnegative
    /// within tolerance certifies the radius-two property.
    pub real_part_margin: f64,
    /// `min over the band grid of 1/(|lambda| - 1) - ||(T - lambda)^-1||`.
    pub band_margin: f64,
    pub band_samples: Vec<BandSample>,
    pub holds: bool,
}

/// Default annulus grid for [`rho_tests`]: radii strictly between one and
/// the upper limit `(rho - 1) / (rho - 2)`, capped at three when the limit
/// is unbounded.
pub fn default_band_grid(rho: f64, radial: usize, angular: usize) -> Vec<Complex64> {
    let r_max = if rho > 2.0 {
        ((rho - 1.0) / (rho - 2.0)).min(3.0)
    } else {
        3.0
    };
    let mut pts = Vec::with_capacity(radial * angular);
    for i in 0..radial {
        let r = 1.0 + (r_max - 1.0) * (i + 1) as f64 / (radial + 1) as f64;
        for j in 0..angular {
            pts.push(Complex64::from_polar(r, TAU * j as f64 / angular as f64));
        }
    }
    pts
}

/// Run the operator-radius tests for radius `rho`.
///
/// The first test sweeps `theta_count` angles and checks that
/// `Re(e^{i theta} T) <= I` holds at each, which characterizes numerical
/// radius at most one when `rho = 2`. The second checks the resolvent bound
/// `||(T - lambda)^-1|| <= 1/(|lambda| - 1)` on the caller's annulus grid.
pub fn rho_tests(
    t: &ComplexMatrix,
    rho: f64,
    theta_count: usize,
    band_grid: &[Complex64],
) -> Result<RhoReport, CriteriaError> {
    assert!(rho >= 2.0, "the annulus test needs rho >= 2");
    assert!(theta_count >= 16, "theta sweep needs at least 16 angles");
    let upper = if rho > 2.0 {
        (rho - 1.0) / (rho - 2.0)
    } else {
        f64::INFINITY
    };
    for pt in band_grid {
        let r = pt.norm();
        assert!(
            r > 1.0 && r < upper * (1.0 + 1e-12),
            "band grid point {pt} is outside the annulus"
        );
    }

    let n = t.dim();
    let id = ComplexMatrix::identity(n);
    let margins = par_map(theta_count, |k| -> Result<f64, CriteriaError> {
        let phase = Complex64::from_polar(1.0, TAU * k as f64 / theta_count as f64);
        let real_part = hermitize(&t.scale(phase));
        let (vals, _) = hermitian_eigen(&id.sub(&real_part))?;
        Ok(vals[0])
    });
    let mut real_part_margin = f64::INFINITY;
    for m in margins {
        real_part_margin = real_part_margin.min(m?);
    }

    let samples = par_map(band_grid.len(), |i| -> Result<BandSample, CriteriaError> {
        let lambda = band_grid[i];
        let norm = resolvent_norm(t, lambda)?;
        Ok(BandSample {
            lambda,
            norm,
            bound: 1.0 / (lambda.norm() - 1.0),
        })
    });
    let mut band_samples = Vec::with_capacity(band_grid.len());
    let mut band_margin = f64::INFINITY;
    for s in samples {
        let s = s?;
        band_margin = band_margin.min(s.bound - s.norm);
        band_samples.push(s);
    }
    if band_grid.is_empty() {
        band_margin = 0.0;
    }

    let real_ok = rho > 2.0 || real_part_margin >= -RHO_TOL;
    let holds = real_ok && band_margin >= -RHO_TOL;
    Ok(RhoReport {
        rho,
        real_part_margin,
        band_margin,
        band_samples,
        holds,
    })
}

// ---------------------------------------------------------------------------
// Power boundedness
// ---------------------------------------------------------------------------

/// Suprema of the power norms of an operator.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PowerReport {
    pub n_max: usize,
    /// `max over 0 <= k <= n_max of ||T^k||`.
    pub sup_forward: f64,
    /// Same for the inverse powers when `T` is invertible.
    pub sup_backward: Option<f64>,
    /// True when a power crossed the overflow ceiling and the sweep aborted.
    pub unbounded: bool,
    pub abort_at: Option<usize>,
}

fn power_sweep(step: &ComplexMatrix, n_max: usize) -> (f64, Option<usize>) {
    let n = step.dim();
    let mut p = ComplexMatrix::identity(n);
    let mut log_scale = 0.0f64;
    let mut sup = 1.0f64;
    for k in 1..=n_max {
        p = p.matmul(step);
        let f = p.frobenius_norm();
        if f == 0.0 {
            return (sup, None);
        }
        // Keep the working product near unit size; the true magnitude lives
        // in the accumulated log factor.
        if !(1e-100..=1e100).contains(&f) {
            p = p.scale(Complex64::new(1.0 / f, 0.0));
            log_scale += f.ln();
        }
        let log_norm = operator_norm(&p).max(f64::MIN_POSITIVE).ln() + log_scale;
        if log_norm > POWER_CEILING.ln() {
            return (f64::INFINITY, Some(k));
        }
        sup = sup.max(log_norm.exp());
    }
    (sup, None)
}

/// Track `||T^k||` for `0 <= k <= n_max`, plus the inverse powers when the
/// operator is invertible, aborting once a norm exceeds `1e12`.
pub fn power_bounded_check(t: &ComplexMatrix, n_max: usize) -> PowerReport {
    let (sup_forward, abort_fwd) = power_sweep(t, n_max);
    let lu = Lu::factor(t);
    let backward = if lu.min_pivot() == 0.0 {
        None
    } else {
        Some(power_sweep(&lu.inverse(), n_max))
    };
    let (sup_backward, abort_bwd) = match backward {
        Some((s, a)) => (Some(s), a),
        None => (None, None),
    };
    let abort_at = abort_fwd.or(abort_bwd);
    PowerReport {
        n_max,
        sup_forward,
        sup_backward,
        unbounded: abort_at.is_some(),
        abort_at,
    }
}

// ---------------------------------------------------------------------------
// Direct similarity diagnostic
// ---------------------------------------------------------------------------

/// Verdict of the eigendecomposition route.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SimilarityVerdict {
    /// Commutes with its adjoint to working precision.
    Normal,
    /// Diagonalizable with a well-conditioned eigenvector matrix.
    SimilarToNormal,
    /// Eigenvector matrix is numerically rank deficient.
    NonDiagonalizable,
    /// Diagonalizable, but the eigenvector conditioning exceeds the cut.
    IllConditionedSimilar,
}

/// Eigendecomposition-based similarity summary.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SimilarityReport {
    pub verdict: SimilarityVerdict,
    /// `||T* T - T T*||`.
    pub normality_defect: f64,
    /// Condition number of the unit-column eigenvector matrix, when it is
    /// invertible.
    pub diagonalizer_condition: Option<f64>,
    pub eigenvalues: Vec<Complex64>,
}

/// Decide, directly from the eigendecomposition, whether the operator is
/// normal, similar to normal with a reported condition number, or neither.
pub fn similarity_diagnostic(
    t: &ComplexMatrix,
    thresholds: &Thresholds,
) -> Result<SimilarityReport, CriteriaError> {
    let sp = spectrum(t)?;
    let scale = {
        let norm = operator_norm(t);
        (norm * norm).max(1.0)
    };
    let kappa = sp.diagonalizer_condition.value();
    let verdict = if sp.normality_defect <= 1e-10 * scale {
        SimilarityVerdict::Normal
    } else {
        match kappa {
            None => SimilarityVerdict::NonDiagonalizable,
            Some(k) if k > thresholds.kappa_cut => SimilarityVerdict::IllConditionedSimilar,
            Some(_) => SimilarityVerdict::SimilarToNormal,
        }
    };
    Ok(SimilarityReport {
        verdict,
        normality_defect: sp.normality_defect,
        diagonalizer_condition: kappa,
        eigenvalues: sp.eigenvalues,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::{nice_family, radial_diffeo, CircleDiffeo};
    use crate::linalg::test_support::seeded_matrix;

    fn circle() -> JordanCurve {
        JordanCurve::builtin("circle").unwrap()
    }

    fn circle_diffeo() -> CircleDiffeo {
        radial_diffeo(&circle(), None).unwrap()
    }

    fn roots_of_unity(n: usize) -> ComplexMatrix {
        let diag: Vec<Complex64> = (0..n)
            .map(|k| Complex64::from_polar(1.0, TAU * k as f64 / n as f64))
            .collect();
        ComplexMatrix::from_diag(&diag)
    }

    fn jordan_block(n: usize, ev: Complex64) -> ComplexMatrix {
        ComplexMatrix::from_fn(n, |i, j| {
            if i == j {
                ev
            } else if j == i + 1 {
                ONE
            } else {
                Complex64::default()
            }
        })
    }

    fn condition_number(s: &ComplexMatrix) -> f64 {
        operator_norm(s) * operator_norm(&Lu::factor(s).inverse())
    }

    /// A conditioned similarity of the n-th roots of unity.
    fn similar_pair(n: usize) -> (ComplexMatrix, f64) {
        let mut s = seeded_matrix(n, 11).scale(Complex64::new(0.1, 0.0));
        for i in 0..n {
            let d = 10f64.powf(0.5 - i as f64 / (n - 1) as f64);
            let cur = s.get(i, i);
            s.set(i, i, cur + Complex64::new(d, 0.0));
        }
        let t = s
            .matmul(&roots_of_unity(n))
            .matmul(&Lu::factor(&s).inverse());
        (t, condition_number(&s))
    }

    fn quick_grid() -> MeanSquareGrid {
        MeanSquareGrid {
            s_values: default_s_grid(),
            min_nodes: 256,
        }
    }

    #[test]
    fn profile_of_a_unitary_diagonal_is_flat_at_one() {
        let t = roots_of_unity(8);
        let profile = resolvent_profile(
            &t,
            &circle(),
            &ProfileGrid::default(),
            &Thresholds::default(),
        )
        .unwrap();
        assert!((profile.c_inside - 1.0).abs() <= 1e-8, "{}", profile.c_inside);
        assert!((profile.c_outside - 1.0).abs() <= 1e-8, "{}", profile.c_outside);
        assert!(profile.stampfli_normal);
        assert_eq!(profile.samples.len(), 200);
        let cap = profile.c_inside.max(profile.c_outside) * (1.0 + 1e-12);
        for s in &profile.samples {
            assert!(s.dist * s.norm <= cap);
        }
    }

    #[test]
    fn profile_respects_the_spectral_lower_bound_at_every_sample() {
        let (t, _) = similar_pair(6);
        let profile = resolvent_profile(
            &t,
            &circle(),
            &ProfileGrid::default(),
            &Thresholds::default(),
        )
        .unwrap();
        let eigs = eigenvalues(&t).unwrap();
        for s in &profile.samples {
            let gap = eigs
                .iter()
                .fold(f64::INFINITY, |a, ev| a.min((s.lambda - ev).norm()));
            assert!(gap * s.norm >= 1.0 - 1e-10, "bound failed at {}", s.lambda);
        }
    }

    #[test]
    fn profile_of_a_conditioned_similarity_stays_below_kappa() {
        let (t, kappa) = similar_pair(8);
        let profile = resolvent_profile(
            &t,
            &circle(),
            &ProfileGrid::default(),
            &Thresholds::default(),
        )
        .unwrap();
        let c = profile.c_inside.max(profile.c_outside);
        assert!(c >= 1.0 - 1e-10);
        assert!(c <= kappa + 1e-6, "c = {c}, kappa = {kappa}");
        assert!(!profile.stampfli_normal || c <= 1.0 + 1e-6);
    }

    #[test]
    fn profile_of_a_jordan_block_grows_like_inverse_distance() {
        let t = jordan_block(2, ONE);
        let profile = resolvent_profile(
            &t,
            &circle(),
            &ProfileGrid {
                angular: 13,
                levels: 5,
                d_max: None,
            },
            &Thresholds::default(),
        )
        .unwrap();
        assert!(!profile.stampfli_normal);
        let pts: Vec<(f64, f64)> = profile
            .levels
            .iter()
            .enumerate()
            .map(|(j, &d)| (d, profile.level_constant(Side::Exterior, j)))
            .collect();
        let xs: Vec<f64> = pts.iter().map(|(d, _)| d.ln()).collect();
        let ys: Vec<f64> = pts.iter().map(|(_, c)| c.ln()).collect();
        let xm = xs.iter().sum::<f64>() / xs.len() as f64;
        let ym = ys.iter().sum::<f64>() / ys.len() as f64;
        let slope = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| (x - xm) * (y - ym))
            .sum::<f64>()
            / xs.iter().map(|x| (x - xm) * (x - xm)).sum::<f64>();
        assert!((slope + 1.0).abs() <= 0.2, "slope = {slope}");
    }

    #[test]
    fn profile_rejects_spectrum_off_the_curve() {
        let t = ComplexMatrix::from_diag(&[Complex64::new(3.0, 0.0), ONE]);
        let err = resolvent_profile(
            &t,
            &circle(),
            &ProfileGrid::default(),
            &Thresholds::default(),
        )
        .unwrap_err();
        assert!(matches!(err, CriteriaError::SpectrumOffCurve { .. }));
    }

    #[test]
    fn meansquare_matches_the_unitary_closed_form() {
        let t = roots_of_unity(6);
        let family = nice_family(&circle_diffeo(), FamilySide::Outside, 1.0).unwrap();
        let report = mean_square(
            &t,
            &family,
            false,
            &ProbeSpec::default(),
            &MeanSquareGrid::default(),
        )
        .unwrap();
        for &(s, v) in &report.per_s {
            let r = 1.0 + s;
            let exact = TAU * r / (r + 1.0);
            assert!(
                (v - exact).abs() <= 1e-4 * exact,
                "s = {s}: {v} vs {exact}"
            );
            assert!(v > std::f64::consts::PI && v <= 2.0 * TAU / 3.0 + 1e-3);
        }
        assert!(report.growth_exponent.abs() <= 0.02, "{}", report.growth_exponent);
        for &(_, v) in &report.per_s {
            assert!(v > 0.0 && report.fitted_c >= v);
        }
    }

    #[test]
    fn meansquare_flags_a_jordan_violator() {
        let t = jordan_block(2, ONE);
        let family = nice_family(&circle_diffeo(), FamilySide::Outside, 1.0).unwrap();
        let report = mean_square(&t, &family, false, &ProbeSpec::default(), &quick_grid()).unwrap();
        assert!(report.growth_exponent >= 0.8, "{}", report.growth_exponent);
    }

    #[test]
    fn meansquare_of_a_scalar_inside_a_tiny_circle_is_finite() {
        let t = ComplexMatrix::from_diag(&[Complex64::default()]);
        let curve = JordanCurve::builtin("circle:0.1").unwrap();
        let diffeo = radial_diffeo(&curve, None).unwrap();
        let family = nice_family(&diffeo, FamilySide::Outside, 0.5).unwrap();
        let report = mean_square(&t, &family, false, &ProbeSpec::default(), &quick_grid()).unwrap();
        for &(_, v) in &report.per_s {
            assert!(v.is_finite() && v > 0.0 && v <= 20.0 * std::f64::consts::PI);
        }
        assert!(report.growth_exponent <= 0.1, "{}", report.growth_exponent);
    }

    #[test]
    fn meansquare_rejects_nodes_on_the_spectrum() {
        // Eigenvalue placed exactly on the s = 1 curve of the family, which
        // the angular grid hits at its first node.
        let t = ComplexMatrix::from_diag(&[Complex64::new(1.5, 0.0)]);
        let family = nice_family(&circle_diffeo(), FamilySide::Outside, 0.5).unwrap();
        let grid = MeanSquareGrid {
            s_values: vec![1.0],
            min_nodes: 64,
        };
        let err = mean_square(&t, &family, false, &ProbeSpec::default(), &grid).unwrap_err();
        assert!(matches!(err, CriteriaError::SingularResolvent { .. }));
    }

    #[test]
    fn naboko_pairing_verdict_survives_a_role_swap() {
        let t = roots_of_unity(4);
        let diffeo = circle_diffeo();
        let inside = nice_family(&diffeo, FamilySide::Inside, 0.5).unwrap();
        let outside = nice_family(&diffeo, FamilySide::Outside, 0.5).unwrap();
        let probe = ProbeSpec::default();
        let grid = quick_grid();
        let verdict = |family: &CurveFamily, adjoint: bool| {
            let r = mean_square(&t, family, adjoint, &probe, &grid).unwrap();
            assert!(r.fitted_c.is_finite());
            r.growth_exponent.abs() <= 0.1
        };
        let direct = verdict(&inside, false) && verdict(&outside, true);
        let swapped = verdict(&outside, false) && verdict(&inside, true);
        assert!(direct && swapped);
    }

    #[test]
    fn cross_family_ratio_is_stable_for_concentric_circles() {
        let t = roots_of_unity(5);
        let diffeo = circle_diffeo();
        let wide = nice_family(&diffeo, FamilySide::Outside, 1.0).unwrap();
        let narrow = nice_family(&diffeo, FamilySide::Outside, 0.7).unwrap();
        let ratio = cross_family_stability(
            &t,
            &wide,
            &narrow,
            false,
            &ProbeSpec::default(),
            &quick_grid(),
        )
        .unwrap();
        assert!(ratio >= 1.0 / 3.0 && ratio <= 3.0, "ratio = {ratio}");
        let identical = cross_family_stability(
            &t,
            &wide,
            &wide,
            false,
            &ProbeSpec::default(),
            &quick_grid(),
        )
        .unwrap();
        assert_eq!(identical, 1.0);
    }

    #[test]
    fn cross_family_ratio_is_finite_on_an_ellipse() {
        let curve = JordanCurve::builtin("ellipse:1.2:1").unwrap();
        let diffeo = radial_diffeo(&curve, None).unwrap();
        let diag: Vec<Complex64> = (0..4).map(|k| curve.psi(TAU * k as f64 / 4.0)).collect();
        let t = ComplexMatrix::from_diag(&diag);
        let fam_a = nice_family(&diffeo, FamilySide::Outside, 0.2).unwrap();
        let fam_b = nice_family(&diffeo, FamilySide::Outside, 0.1).unwrap();
        let ratio = cross_family_stability(
            &t,
            &fam_a,
            &fam_b,
            false,
            &ProbeSpec::default(),
            &quick_grid(),
        )
        .unwrap();
        assert!(ratio.is_finite() && ratio > 0.2 && ratio < 5.0, "ratio = {ratio}");
    }

    #[test]
    fn pointwise_link_is_small_for_a_unitary() {
        let t = roots_of_unity(6);
        let family = nice_family(&circle_diffeo(), FamilySide::Outside, 0.5).unwrap();
        let profile = resolvent_profile(
            &t,
            &circle(),
            &ProfileGrid::default(),
            &Thresholds::default(),
        )
        .unwrap();
        let report = meansquare_implies_pointwise_check(
            &t,
            &family,
            &profile,
            &ProbeSpec::default(),
            &quick_grid(),
            &Thresholds::default(),
        )
        .unwrap();
        assert!(report.applicable);
        let link = report.link_constant.unwrap();
        assert!(link > 0.0 && link < 1.0, "link = {link}");
        for level in &report.per_level {
            assert!((level.pointwise - 1.0).abs() <= 1e-8);
            assert!(level.pointwise <= link * level.prediction * (1.0 + 1e-12));
        }
    }

    #[test]
    fn pointwise_link_of_a_similarity_is_controlled_by_its_condition() {
        let (t, kappa) = similar_pair(6);
        let family = nice_family(&circle_diffeo(), FamilySide::Outside, 0.5).unwrap();
        let profile = resolvent_profile(
            &t,
            &circle(),
            &ProfileGrid::default(),
            &Thresholds::default(),
        )
        .unwrap();
        let report = meansquare_implies_pointwise_check(
            &t,
            &family,
            &profile,
            &ProbeSpec::default(),
            &quick_grid(),
            &Thresholds::default(),
        )
        .unwrap();
        assert!(report.applicable);
        let link = report.link_constant.unwrap();
        assert!(link <= kappa * kappa, "link = {link}, kappa = {kappa}");
    }

    #[test]
    fn pointwise_link_is_not_applicable_for_a_jordan_block() {
        let t = jordan_block(2, ONE);
        let family = nice_family(&circle_diffeo(), FamilySide::Outside, 0.5).unwrap();
        let profile = resolvent_profile(
            &t,
            &circle(),
            &ProfileGrid::default(),
            &Thresholds::default(),
        )
        .unwrap();
        let report = meansquare_implies_pointwise_check(
            &t,
            &family,
            &profile,
            &ProbeSpec::default(),
            &quick_grid(),
            &Thresholds::default(),
        )
        .unwrap();
        assert!(!report.applicable);
        assert!(report.link_constant.is_none());
    }

    #[test]
    fn charfn_of_a_scalar_is_a_mobius_map() {
        let t = ComplexMatrix::from_diag(&[Complex64::new(0.5, 0.0)]);
        let exact = char_fn(&t, Complex64::new(0.25, 0.0)).unwrap();
        assert_eq!(exact.dim(), 1);
        assert!((exact.get(0, 0) - Complex64::new(-2.0 / 7.0, 0.0)).norm() <= 1e-15);
        for k in 0..20 {
            let lambda = Complex64::from_polar(0.05 + 0.04 * k as f64, 0.37 * k as f64);
            let theta = char_fn(&t, lambda).unwrap().get(0, 0);
            let mobius = (lambda - 0.5) / (1.0 - lambda * 0.5);
            assert!((theta - mobius).norm() <= 1e-12, "lambda = {lambda}");
        }
    }

    #[test]
    fn charfn_defect_space_drops_the_unitary_directions() {
        let t = ComplexMatrix::from_diag(&[ONE, Complex64::new(0.5, 0.0)]);
        let cf = CharacteristicFunction::new(&t).unwrap();
        assert_eq!(cf.defect_dimension(), 1);
        let rep = cf.evaluate(Complex64::new(0.25, 0.0)).unwrap();
        assert!((rep.get(0, 0) - Complex64::new(-2.0 / 7.0, 0.0)).norm() <= 1e-12);
    }

    #[test]
    fn charfn_of_a_unitary_is_empty() {
        let t = roots_of_unity(5);
        let cf = CharacteristicFunction::new(&t).unwrap();
        assert_eq!(cf.defect_dimension(), 0);
        assert_eq!(cf.evaluate(Complex64::default()).unwrap().dim(), 0);
        let report = nf_criterion(&t, &DiskGrid::default()).unwrap();
        assert!(report.empty_defect);
        assert!(report.invertible_everywhere);
        assert_eq!(report.sup_inv_norm, 0.0);
    }

    #[test]
    fn charfn_at_zero_is_minus_t_on_the_defect_space() {
        let mut t = seeded_matrix(4, 21);
        let norm = operator_norm(&t);
        t = t.scale(Complex64::new(0.8 / norm, 0.0));
        let cf = CharacteristicFunction::new(&t).unwrap();
        let k = cf.defect_dimension();
        assert_eq!(k, 4);
        let rep = cf.evaluate(Complex64::default()).unwrap();
        for j in 0..k {
            let mut lifted = vec![Complex64::default(); 4];
            for i in 0..k {
                for (r, b) in cf.basis_adj()[i].iter().enumerate() {
                    lifted[r] += b * rep.get(i, j);
                }
            }
            let direct = t.mul_vec(&cf.basis()[j]);
            let gap: f64 = lifted
                .iter()
                .zip(&direct)
                .map(|(l, d)| (l + d).norm())
                .fold(0.0, f64::max);
            assert!(gap <= 1e-12, "column {j}: {gap}");
        }
    }

    #[test]
    fn charfn_rejects_an_expansive_operator() {
        let t = ComplexMatrix::from_diag(&[Complex64::new(1.5, 0.0)]);
        let err = char_fn(&t, Complex64::default()).unwrap_err();
        assert!(matches!(err, CriteriaError::NotAContraction { .. }));
    }

    #[test]
    fn charfn_inverse_norm_dominates_the_reciprocal_norm() {
        let mut t = seeded_matrix(3, 33);
        let norm = operator_norm(&t);
        t = t.scale(Complex64::new(0.7 / norm, 0.0));
        let cf = CharacteristicFunction::new(&t).unwrap();
        for k in 0..8 {
            let lambda = Complex64::from_polar(0.1 * (k + 1) as f64, 0.9 * k as f64);
            let rep = cf.evaluate(lambda).unwrap();
            let inv_norm = 1.0 / sigma_min(&rep);
            assert!(inv_norm * operator_norm(&rep) >= 1.0 - 1e-10);
        }
    }

    #[test]
    fn nf_detects_the_interior_spectrum_of_a_strict_contraction() {
        let t = ComplexMatrix::from_diag(&[Complex64::new(0.5, 0.0)]);
        let report = nf_criterion(&t, &DiskGrid::default()).unwrap();
        assert!(!report.empty_defect);
        assert!(!report.invertible_everywhere);
        assert_eq!(report.singular_points.len(), 1);
        assert!(report.sup_inv_norm.is_finite());
        assert!(report.sup_inv_norm > 10.0);
    }

    #[test]
    fn nf_route_for_the_similar_to_unitary_class() {
        // A diagonalizable matrix with unimodular spectrum is a contraction
        // only when it is already unitary, so the criterion either rejects
        // the conditioned representative or reports the vacuous certificate.
        let u = roots_of_unity(2);
        let s = ComplexMatrix::from_fn(2, |i, j| {
            if i == j {
                if i == 0 {
                    Complex64::new(4.0, 0.0)
                } else {
                    ONE
                }
            } else if i == 0 && j == 1 {
                Complex64::new(1.5, 0.0)
            } else {
                Complex64::default()
            }
        });
        let conditioned = s.matmul(&u).matmul(&Lu::factor(&s).inverse());
        assert!(operator_norm(&conditioned) > 1.0 + 1e-6);
        let err = nf_criterion(&conditioned, &DiskGrid::default()).unwrap_err();
        assert!(matches!(err, CriteriaError::NotAContraction { .. }));

        let report = nf_criterion(&u, &DiskGrid::default()).unwrap();
        assert!(report.empty_defect && report.invertible_everywhere);
    }

    #[test]
    fn rho_margins_vanish_for_a_unitary() {
        let t = roots_of_unity(8);
        let report = rho_tests(&t, 2.0, 32, &default_band_grid(2.0, 6, 16)).unwrap();
        assert!(report.real_part_margin >= -RHO_TOL);
        assert!(report.real_part_margin <= 1e-6);
        assert!(report.band_margin >= -RHO_TOL);
        assert!(report.holds);
    }

    #[test]
    fn rho_certifies_the_shear_as_a_two_contraction() {
        let t = ComplexMatrix::from_fn(2, |i, j| {
            if i == 0 && j == 1 {
                Complex64::new(2.0, 0.0)
            } else {
                Complex64::default()
            }
        });
        assert!((operator_norm(&t) - 2.0).abs() <= 1e-12);
        let report = rho_tests(&t, 2.0, 64, &default_band_grid(2.0, 8, 32)).unwrap();
        assert!(report.real_part_margin >= -RHO_TOL, "{}", report.real_part_margin);
        assert!(report.real_part_margin <= 1e-9);
        assert!(report.holds);
    }

    #[test]
    fn rho_rejects_a_scaled_identity() {
        let t = ComplexMatrix::from_diag(&[Complex64::new(1.5, 0.0); 2]);
        let report = rho_tests(&t, 2.0, 32, &default_band_grid(2.0, 6, 16)).unwrap();
        assert!((report.real_part_margin + 0.5).abs() <= 1e-9);
        assert!(!report.holds);
    }

    #[test]
    fn powers_of_a_unitary_stay_at_one() {
        let report = power_bounded_check(&roots_of_unity(6), 50);
        assert!((report.sup_forward - 1.0).abs() <= 1e-9);
        assert!((report.sup_backward.unwrap() - 1.0).abs() <= 1e-9);
        assert!(!report.unbounded);
    }

    #[test]
    fn powers_of_a_similarity_stay_below_its_condition() {
        let (t, kappa) = similar_pair(5);
        let report = power_bounded_check(&t, 40);
        assert!(report.sup_forward <= kappa * (1.0 + 1e-9));
        assert!(report.sup_backward.unwrap() <= kappa * (1.0 + 1e-9));
        assert!(!report.unbounded);
    }

    #[test]
    fn powers_of_a_jordan_block_grow_linearly() {
        let report = power_bounded_check(&jordan_block(2, ONE), 64);
        assert!(report.sup_forward >= 0.9 * 64.0);
        assert!(!report.unbounded);
    }

    #[test]
    fn power_sweep_aborts_on_overflow() {
        let t = ComplexMatrix::from_diag(&[Complex64::new(2.0, 0.0); 2]);
        let report = power_bounded_check(&t, 60);
        assert!(report.unbounded);
        let k = report.abort_at.unwrap();
        assert!(k <= 41, "aborted at {k}");
    }

    #[test]
    fn similarity_diagnostic_separates_the_four_verdicts() {
        let th = Thresholds::default();
        let normal = similarity_diagnostic(&roots_of_unity(4), &th).unwrap();
        assert_eq!(normal.verdict, SimilarityVerdict::Normal);

        let (t, kappa) = similar_pair(6);
        let similar = similarity_diagnostic(&t, &th).unwrap();
        assert_eq!(similar.verdict, SimilarityVerdict::SimilarToNormal);
        let reported = similar.diagonalizer_condition.unwrap();
        assert!(reported >= 1.0 && reported <= 10.0 * kappa);

        let jordan = similarity_diagnostic(&jordan_block(3, ONE), &th).unwrap();
        assert_eq!(jordan.verdict, SimilarityVerdict::NonDiagonalizable);

        let tight = Thresholds {
            kappa_cut: 1.0 + 1e-12,
            ..Thresholds::default()
        };
        let flagged = similarity_diagnostic(&t, &tight).unwrap();
        assert_eq!(flagged.verdict, SimilarityVerdict::IllConditionedSimilar);
    }
}
