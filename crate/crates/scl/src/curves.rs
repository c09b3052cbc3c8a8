//! Closed curves in the plane given as trigonometric polynomials, together
//! with the geometric queries the rest of the crate is built on:
//! nearest-point projection, a radial diffeomorphism onto the unit circle,
//! one-parameter families of nearby curves that shrink onto the base curve,
//! and length-density (Ahlfors-type) measurements for those families.
//!
//! A curve is psi(t) = sum over k in [-K, K] of c_k e^{ikt}, oriented
//! counterclockwise. Trigonometric polynomials keep every derivative exact,
//! which the projection and quadrature layers rely on.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::io::CurveFileData;

const TAU: f64 = std::f64::consts::TAU;
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Largest supported coefficient index.
pub const MAX_DEGREE: i64 = 64;

/// Default sampling density (points per unit arclength) for geometric
/// queries.
pub const DEFAULT_GRID_DENSITY: f64 = 64.0;

#[derive(Debug, Error)]
pub enum CurveError {
    #[error("curve degree {0} exceeds the supported maximum {MAX_DEGREE}")]
    TooManyModes(i64),
    #[error("curve tangent vanishes near t = {t:.6}")]
    DerivativeVanishes { t: f64 },
    #[error("curve self-intersects near t = {t1:.6} and t = {t2:.6}")]
    SelfIntersects { t1: f64, t2: f64 },
    #[error("curve is clockwise; counterclockwise orientation is required")]
    NotCounterclockwise,
    #[error("projection of {z} is ambiguous (two nearest points); deterministic choice attached")]
    AmbiguousProjection { z: Complex64, choice: Projection },
    #[error("curve is not star-shaped about {center}: angular argument stalls near t = {t:.6}")]
    NotStarShaped { center: Complex64, t: f64 },
    #[error("family displacement too large: {detail}")]
    BetaTooLarge { detail: String },
    #[error("unknown builtin curve {0:?}")]
    UnknownBuiltin(String),
    #[error("bad builtin parameter: {0}")]
    BadBuiltinParameter(String),
}

/// Which side of the curve a point lies on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Side {
    Interior,
    Exterior,
    OnCurve,
}

/// Nearest point on the curve to a query point.
#[derive(Clone, Copy, Debug)]
pub struct Projection {
    /// The nearest curve point.
    pub point: Complex64,
    /// Parameter t with point = psi(t).
    pub parameter: f64,
    /// |z - point|.
    pub distance: f64,
    pub side: Side,
}

#[derive(Clone, Debug)]
struct CurveCache {
    m: usize,
    total_length: f64,
    diameter: f64,
    reach: f64,
    centroid: Complex64,
}

/// Smooth closed curve with exact spectral derivatives.
#[derive(Clone, Debug)]
pub struct JordanCurve {
    /// Coefficient c_k stored at index k + k_max.
    coeffs: Vec<Complex64>,
    k_max: i64,
    grid_density: f64,
    orientation_ccw: bool,
    cache: CurveCache,
}

impl JordanCurve {
    /// Builds and validates a curve from sparse coefficients `(k, c_k)`.
    ///
    /// Validation checks a fine grid for a nonvanishing tangent, for
    /// self-intersection, and for counterclockwise orientation.
    pub fn new(coeffs: &[(i64, Complex64)], grid_density: f64) -> Result<Self, CurveError> {
        let mut k_max = 1i64;
        for (k, c) in coeffs {
            if k.abs() > MAX_DEGREE {
                return Err(CurveError::TooManyModes(k.abs()));
            }
            if *c != ZERO {
                k_max = k_max.max(k.abs());
            }
        }
        let mut dense = vec![ZERO; (2 * k_max + 1) as usize];
        for (k, c) in coeffs {
            if *c != ZERO {
                dense[(k + k_max) as usize] += *c;
            }
        }
        let mut curve = JordanCurve {
            coeffs: dense,
            k_max,
            grid_density: grid_density.max(8.0),
            orientation_ccw: true,
            cache: CurveCache {
                m: 0,
                total_length: 0.0,
                diameter: 0.0,
                reach: 0.0,
                centroid: ZERO,
            },
        };
        curve.validate_and_cache()?;
        Ok(curve)
    }

    pub fn from_file_data(data: &CurveFileData, grid_density: f64) -> Result<Self, CurveError> {
        let mut coeffs = data.coeffs.clone();
        coeffs.push((0, data.center));
        Self::new(&coeffs, grid_density)
    }

    pub fn file_data(&self) -> CurveFileData {
        let coeffs = (-self.k_max..=self.k_max)
            .filter_map(|k| {
                let c = self.coeff(k);
                if c == ZERO || k == 0 {
                    None
                } else {
                    Some((k, c))
                }
            })
            .collect();
        CurveFileData {
            coeffs,
            center: self.coeff(0),
        }
    }

    /// Named shapes: `circle`, `circle:r`, `ellipse:a:b`, `blob:seed`.
    pub fn builtin(spec: &str) -> Result<Self, CurveError> {
        let parts: Vec<&str> = spec.split(':').collect();
        let parse = |s: &str| -> Result<f64, CurveError> {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite() && *v > 0.0)
                .ok_or_else(|| CurveError::BadBuiltinParameter(format!("{s:?} in {spec:?}")))
        };
        match parts[0] {
            "circle" => {
                let r = if parts.len() > 1 { parse(parts[1])? } else { 1.0 };
                Self::new(&[(1, Complex64::new(r, 0.0))], DEFAULT_GRID_DENSITY)
            }
            "ellipse" => {
                if parts.len() != 3 {
                    return Err(CurveError::BadBuiltinParameter(format!(
                        "ellipse needs two semi-axes, got {spec:?}"
                    )));
                }
                let a = parse(parts[1])?;
                let b = parse(parts[2])?;
                Self::new(
                    &[
                        (1, Complex64::new((a + b) / 2.0, 0.0)),
                        (-1, Complex64::new((a - b) / 2.0, 0.0)),
                    ],
                    DEFAULT_GRID_DENSITY,
                )
            }
            "blob" => {
                let seed: u64 = if parts.len() > 1 {
                    parts[1].parse().map_err(|_| {
                        CurveError::BadBuiltinParameter(format!("blob seed {spec:?}"))
                    })?
                } else {
                    0
                };
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut coeffs = vec![(1i64, Complex64::new(1.0, 0.0))];
                for k in -8i64..=8 {
                    if k == 0 || k == 1 {
                        continue;
                    }
                    let cap = 0.05 / (k * k) as f64;
                    let mag = cap * (0.25 + 0.75 * rng.gen::<f64>());
                    let phase = TAU * rng.gen::<f64>();
                    coeffs.push((k, Complex64::from_polar(mag, phase)));
                }
                Self::new(&coeffs, DEFAULT_GRID_DENSITY)
            }
            other => Err(CurveError::UnknownBuiltin(other.to_string())),
        }
    }

    #[inline]
    pub fn degree(&self) -> i64 {
        self.k_max
    }

    pub fn coeff(&self, k: i64) -> Complex64 {
        if k.abs() > self.k_max {
            ZERO
        } else {
            self.coeffs[(k + self.k_max) as usize]
        }
    }

    pub fn grid_density(&self) -> f64 {
        self.grid_density
    }

    pub fn is_counterclockwise(&self) -> bool {
        self.orientation_ccw
    }

    /// Point psi(t).
    pub fn psi(&self, t: f64) -> Complex64 {
        self.eval(t).0
    }

    /// First parameter derivative d psi / dt.
    pub fn psi_t(&self, t: f64) -> Complex64 {
        self.eval(t).1
    }

    /// Second parameter derivative.
    pub fn psi_tt(&self, t: f64) -> Complex64 {
        self.eval(t).2
    }

    /// Point and first two derivatives in one sweep.
    pub fn eval(&self, t: f64) -> (Complex64, Complex64, Complex64) {
        let e = Complex64::from_polar(1.0, t);
        let e_conj = e.conj();
        let mut p = ZERO;
        let mut dp = ZERO;
        let mut ddp = ZERO;
        let mut phase = Complex64::from_polar(1.0, -(self.k_max as f64) * t);
        for (idx, c) in self.coeffs.iter().enumerate() {
            let k = idx as i64 - self.k_max;
            if *c != ZERO {
                let term = c * phase;
                let ik = Complex64::new(0.0, k as f64);
                p += term;
                dp += term * ik;
                ddp += term * ik * ik;
            }
            phase *= e;
        }
        let _ = e_conj;
        (p, dp, ddp)
    }

    pub fn total_length(&self) -> f64 {
        self.cache.total_length
    }

    pub fn diameter(&self) -> f64 {
        self.cache.diameter
    }

    /// Measured reach: the infimum over sampled point pairs (x, y) of
    /// |y - x|^2 / (2 dist(y - x, tangent at x)), the classical two-point
    /// lower bound for the distance from the curve to its medial axis.
    pub fn reach(&self) -> f64 {
        self.cache.reach
    }

    /// Mean of the uniform-parameter samples.
    pub fn centroid(&self) -> Complex64 {
        self.cache.centroid
    }

    pub fn grid_size(&self) -> usize {
        self.cache.m
    }

    fn validate_and_cache(&mut self) -> Result<(), CurveError> {
        let probe_m = 1024usize.max(32 * self.k_max as usize);
        let mut length = 0.0;
        for i in 0..probe_m {
            let t = TAU * i as f64 / probe_m as f64;
            let (_, dp, _) = self.eval(t);
            length += dp.norm();
        }
        length *= TAU / probe_m as f64;

        let m = ((self.grid_density * length).max(256.0) as usize).next_power_of_two();
        let mut points = Vec::with_capacity(m);
        let mut tangents = Vec::with_capacity(m);
        let mut signed_area = 0.0;
        let mut total_length = 0.0;
        let mut centroid = ZERO;
        let mut min_tangent = f64::INFINITY;
        let mut min_tangent_t = 0.0;
        for i in 0..m {
            let t = TAU * i as f64 / m as f64;
            let (p, dp, _) = self.eval(t);
            signed_area += (p.conj() * dp).im;
            total_length += dp.norm();
            centroid += p;
            if dp.norm() < min_tangent {
                min_tangent = dp.norm();
                min_tangent_t = t;
            }
            points.push(p);
            tangents.push(dp);
        }
        signed_area *= 0.5 * TAU / m as f64;
        total_length *= TAU / m as f64;
        centroid /= m as f64;

        let mut diameter = 0.0f64;
        let stride = (m / 256).max(1);
        for i in (0..m).step_by(stride) {
            for j in (i + stride..m).step_by(stride) {
                diameter = diameter.max((points[i] - points[j]).norm());
            }
        }

        if min_tangent <= 1e-9 * diameter.max(1.0) {
            return Err(CurveError::DerivativeVanishes { t: min_tangent_t });
        }
        if signed_area <= 0.0 {
            return Err(CurveError::NotCounterclockwise);
        }

        // Self-intersection: any two samples at well-separated parameters
        // must stay apart by more than a few grid steps of arclength, the
        // closest approach two transversally crossing branches can hide at.
        let check_m = 512.min(m);
        let check_stride = m / check_m;
        let sep = check_m / 16;
        let max_tangent = tangents.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let floor = 4.0 * max_tangent * TAU / check_m as f64;
        for a in 0..check_m {
            for b in a + sep..check_m {
                if check_m - (b - a) < sep {
                    continue;
                }
                let d = (points[a * check_stride] - points[b * check_stride]).norm();
                if d < floor {
                    return Err(CurveError::SelfIntersects {
                        t1: TAU * (a * check_stride) as f64 / m as f64,
                        t2: TAU * (b * check_stride) as f64 / m as f64,
                    });
                }
            }
        }

        // Two-point reach estimate on a moderate subsample.
        let reach_m = 512.min(m);
        let reach_stride = m / reach_m;
        let mut reach = f64::INFINITY;
        for a in 0..reach_m {
            let pa = points[a * reach_stride];
            let ta = tangents[a * reach_stride];
            let na = -Complex64::new(0.0, 1.0) * ta / ta.norm();
            for b in 0..reach_m {
                if a == b {
                    continue;
                }
                let v = points[b * reach_stride] - pa;
                let denom = 2.0 * (na.conj() * v).re.abs();
                let vn = v.norm_sqr();
                if denom > 1e-14 * vn.max(1e-300) {
                    reach = reach.min(vn / denom);
                }
            }
        }
        if !reach.is_finite() {
            reach = diameter;
        }

        self.cache = CurveCache {
            m,
            total_length,
            diameter,
            reach,
            centroid,
        };
        self.orientation_ccw = true;
        Ok(())
    }

    /// Nearest-point projection: coarse scan over 16 K nodes, Newton
    /// refinement on the distance stationarity condition, golden-section
    /// fallback. When two separated near-minima tie, the smaller-parameter
    /// one is chosen and reported through `AmbiguousProjection`.
    pub fn project(&self, z: Complex64) -> Result<Projection, CurveError> {
        let coarse = (16 * self.k_max as usize).max(16);
        let mut dist: Vec<f64> = Vec::with_capacity(coarse);
        for i in 0..coarse {
            let t = TAU * i as f64 / coarse as f64;
            dist.push((self.psi(t) - z).norm());
        }
        let mut candidates: Vec<usize> = (0..coarse)
            .filter(|&i| {
                let prev = dist[(i + coarse - 1) % coarse];
                let next = dist[(i + 1) % coarse];
                dist[i] <= prev && dist[i] <= next
            })
            .collect();
        if candidates.is_empty() {
            candidates = vec![(0..coarse).min_by(|&a, &b| dist[a].total_cmp(&dist[b])).unwrap()];
        }
        candidates.sort_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(a.cmp(&b)));
        candidates.truncate(12);

        let h = TAU / coarse as f64;
        let refined: Vec<(f64, f64)> = candidates
            .iter()
            .map(|&i| {
                let t0 = TAU * i as f64 / coarse as f64;
                let (t, d) = self.refine_projection(z, t0, t0 - 1.5 * h, t0 + 1.5 * h);
                (t.rem_euclid(TAU), d)
            })
            .collect();
        let d_min = refined.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
        let tie = d_min * (1.0 + 1e-8) + 1e-14 * self.cache.diameter;
        let mut tied: Vec<(f64, f64)> = refined.into_iter().filter(|r| r.1 <= tie).collect();
        tied.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (t_best, d_best) = tied[0];
        let choice = self.finish_projection(z, t_best, d_best);

        let feature = 0.25 * self.cache.reach;
        for &(t_other, _) in tied.iter().skip(1) {
            if (self.psi(t_other) - choice.point).norm() > feature {
                return Err(CurveError::AmbiguousProjection { z, choice });
            }
        }
        Ok(choice)
    }

    /// Projection with ambiguity collapsed to the deterministic choice.
    pub fn project_flat(&self, z: Complex64) -> Projection {
        match self.project(z) {
            Ok(p) => p,
            Err(CurveError::AmbiguousProjection { choice, .. }) => choice,
            Err(_) => unreachable!("projection only fails with the ambiguity marker"),
        }
    }

    fn finish_projection(&self, z: Complex64, t: f64, distance: f64) -> Projection {
        let t = t.rem_euclid(TAU);
        let (point, tangent, _) = self.eval(t);
        let side = if distance <= 1e-12 * self.cache.diameter.max(1.0) {
            Side::OnCurve
        } else {
            // Sign of the cross product of the tangent with z - point: the
            // interior of a counterclockwise curve lies to the left of the
            // tangent, which matches the winding-number-parity rule.
            if (tangent.conj() * (z - point)).im > 0.0 {
                Side::Interior
            } else {
                Side::Exterior
            }
        };
        Projection {
            point,
            parameter: t,
            distance,
            side,
        }
    }

    fn refine_projection(&self, z: Complex64, t0: f64, lo: f64, hi: f64) -> (f64, f64) {
        let scale = self.cache.diameter.max(1.0);
        let mut t = t0;
        let mut converged = false;
        for _ in 0..30 {
            let (p, dp, ddp) = self.eval(t);
            let g = ((p - z).conj() * dp).re;
            let gp = dp.norm_sqr() + ((p - z).conj() * ddp).re;
            if gp <= 0.0 {
                break;
            }
            let step = g / gp;
            let next = t - step;
            if next < lo || next > hi {
                break;
            }
            t = next;
            if step.abs() < 1e-15 * (1.0 + t.abs()) {
                converged = true;
                break;
            }
        }
        if !converged {
            let (p, dp, _) = self.eval(t);
            let g = ((p - z).conj() * dp).re;
            if g.abs() > 1e-10 * scale * scale {
                t = self.golden_section(z, lo, hi);
            }
        }
        (t, (self.psi(t) - z).norm())
    }

    fn golden_section(&self, z: Complex64, mut a: f64, mut b: f64) -> f64 {
        let phi = (5.0f64.sqrt() - 1.0) / 2.0;
        let q = |t: f64| (self.psi(t) - z).norm_sqr();
        let mut c = b - phi * (b - a);
        let mut d = a + phi * (b - a);
        let mut qc = q(c);
        let mut qd = q(d);
        for _ in 0..120 {
            if qc < qd {
                b = d;
                d = c;
                qd = qc;
                c = b - phi * (b - a);
                qc = q(c);
            } else {
                a = c;
                c = d;
                qc = qd;
                d = a + phi * (b - a);
                qd = q(d);
            }
        }
        0.5 * (a + b)
    }
}

/// In-place radix-2 FFT; length must be a power of two.
pub(crate) fn fft(buf: &mut [Complex64], inverse: bool) {
    let n = buf.len();
    assert!(n.is_power_of_two(), "fft length must be a power of two");
    let mut j = 0usize;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            buf.swap(i, j);
        }
    }
    let sign = if inverse { 1.0 } else { -1.0 };
    let mut len = 2;
    while len <= n {
        let ang = sign * TAU / len as f64;
        let wl = Complex64::from_polar(1.0, ang);
        let mut i = 0;
        while i < n {
            let mut w = Complex64::new(1.0, 0.0);
            for k in 0..len / 2 {
                let u = buf[i + k];
                let v = buf[i + k + len / 2] * w;
                buf[i + k] = u + v;
                buf[i + k + len / 2] = u - v;
                w *= wl;
            }
            i += len;
        }
        len <<= 1;
    }
}

/// Derivative d/dt of smooth 2 pi periodic samples, by Fourier transform.
/// Sample count must be a power of two.
pub fn spectral_derivative(samples: &[Complex64]) -> Vec<Complex64> {
    let n = samples.len();
    let mut buf = samples.to_vec();
    fft(&mut buf, false);
    for (idx, v) in buf.iter_mut().enumerate() {
        let k = if idx <= n / 2 {
            idx as i64
        } else {
            idx as i64 - n as i64
        };
        let k = if idx == n / 2 { 0 } else { k };
        *v *= Complex64::new(0.0, k as f64);
    }
    fft(&mut buf, true);
    let scale = 1.0 / n as f64;
    buf.iter().map(|v| v * scale).collect()
}

/// Radial map onto the unit circle about a fixed interior center:
/// each boundary point goes to its direction vector, and the inverse
/// rebuilds the curve from the angle-indexed radius function.
#[derive(Clone, Debug)]
pub struct CircleDiffeo {
    curve: JordanCurve,
    center: Complex64,
    m: usize,
    /// Unwrapped boundary angle at t_i = 2 pi i / m, with a final entry at
    /// angle_at[m] = angle_at[0] + 2 pi.
    angle_at: Vec<f64>,
    tangential_samples: Vec<Complex64>,
}

/// Builds the radial diffeomorphism about `center` (default: the centroid
/// of the curve samples). Fails with `NotStarShaped` when the boundary
/// angle seen from the center is not strictly increasing.
pub fn radial_diffeo(
    curve: &JordanCurve,
    center: Option<Complex64>,
) -> Result<CircleDiffeo, CurveError> {
    let center = center.unwrap_or_else(|| curve.centroid());
    let m = curve.grid_size();
    let mut angle_at = Vec::with_capacity(m + 1);
    let mut boundary = Vec::with_capacity(m);
    for i in 0..m {
        let t = TAU * i as f64 / m as f64;
        let (p, dp, _) = curve.eval(t);
        let u = p - center;
        let b = (u.conj() * dp).im;
        if u.norm() <= 1e-12 * curve.diameter().max(1.0) || b <= 0.0 {
            return Err(CurveError::NotStarShaped { center, t });
        }
        boundary.push(u / u.norm());
        if i == 0 {
            angle_at.push(u.arg());
        } else {
            let prev = angle_at[i - 1];
            let inc = (u * Complex64::from_polar(1.0, -prev)).arg();
            if inc <= 0.0 {
                return Err(CurveError::NotStarShaped { center, t });
            }
            angle_at.push(prev + inc);
        }
    }
    let closing = angle_at[0] + TAU;
    if (angle_at[m - 1] - closing).abs() >= TAU {
        return Err(CurveError::NotStarShaped {
            center,
            t: TAU * (m - 1) as f64 / m as f64,
        });
    }
    angle_at.push(closing);

    // Tangential derivative of the boundary map along the curve, taken the
    // stated way: spectral differentiation of the boundary values in t,
    // divided by psi'.
    let db_dt = spectral_derivative(&boundary);
    let tangential_samples: Vec<Complex64> = (0..m)
        .map(|i| {
            let t = TAU * i as f64 / m as f64;
            db_dt[i] / curve.psi_t(t)
        })
        .collect();

    Ok(CircleDiffeo {
        curve: curve.clone(),
        center,
        m,
        angle_at,
        tangential_samples,
    })
}

impl CircleDiffeo {
    pub fn center(&self) -> Complex64 {
        self.center
    }

    pub fn curve(&self) -> &JordanCurve {
        &self.curve
    }

    /// Boundary map t -> eta(psi(t)), a unit vector.
    pub fn boundary_values(&self, t: f64) -> Complex64 {
        let u = self.curve.psi(t) - self.center;
        u / u.norm()
    }

    /// Complex derivative of the map along the curve at psi(t), by the
    /// exact chain rule. The spectral-route samples are kept alongside and
    /// must agree with this (see tests).
    pub fn tangential_derivative(&self, t: f64) -> Complex64 {
        let (p, dp, _) = self.curve.eval(t);
        let u = p - self.center;
        let r = u.norm();
        let deta_dt = dp / r - u * (u.conj() * dp).re / (r * r * r);
        deta_dt / dp
    }

    /// Spectral-differentiation samples of the tangential derivative at
    /// the uniform construction grid.
    pub fn tangential_derivative_samples(&self) -> &[Complex64] {
        &self.tangential_samples
    }

    /// Curve parameter t with boundary angle theta (mod 2 pi).
    pub fn parameter_for_angle(&self, theta: f64) -> f64 {
        let base = self.angle_at[0];
        let target = base + (theta - base).rem_euclid(TAU);
        let mut lo = 0usize;
        let mut hi = self.m;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.angle_at[mid] <= target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let h = TAU / self.m as f64;
        let t_lo = h * lo as f64;
        let seg = self.angle_at[hi] - self.angle_at[lo];
        let mut est_angle = self.angle_at[lo];
        let mut t = if seg > 0.0 {
            t_lo + h * (target - self.angle_at[lo]) / seg
        } else {
            t_lo
        };
        for _ in 0..12 {
            let (p, dp, _) = self.curve.eval(t);
            let u = p - self.center;
            let ang = est_angle + (u * Complex64::from_polar(1.0, -est_angle)).arg();
            let slope = (u.conj() * dp).im / u.norm_sqr();
            let step = (ang - target) / slope;
            t -= step;
            est_angle = ang - slope * step;
            if step.abs() < 1e-15 * (1.0 + t.abs()) {
                break;
            }
        }
        t.rem_euclid(TAU)
    }

    /// Radius function and its first two angle derivatives at theta.
    pub fn radius_jet(&self, theta: f64) -> (f64, f64, f64) {
        let t = self.parameter_for_angle(theta);
        let (p, dp, ddp) = self.curve.eval(t);
        let u = p - self.center;
        let r = u.norm();
        let a = (u.conj() * dp).re;
        let b = (u.conj() * dp).im;
        let ap = dp.norm_sqr() + (u.conj() * ddp).re;
        let bp = (u.conj() * ddp).im;
        let r1 = r * a / b;
        let r2 = r * a * a / (b * b) + r * r * r * ap / (b * b) - r * r * r * a * bp / (b * b * b);
        (r, r1, r2)
    }

    /// Curve point indexed by boundary angle, with its first two angle
    /// derivatives: the data the family construction and the quadrature
    /// contours run on.
    pub fn point_jet(&self, theta: f64) -> (Complex64, Complex64, Complex64) {
        let (r, r1, r2) = self.radius_jet(theta);
        let e = Complex64::from_polar(1.0, theta);
        let p = self.center + r * e;
        let p1 = Complex64::new(r1, r) * e;
        let p2 = Complex64::new(r2 - r, 2.0 * r1) * e;
        (p, p1, p2)
    }

    /// Extends the boundary map radially: z -> (z - center) / r(arg).
    pub fn forward(&self, z: Complex64) -> Complex64 {
        let u = z - self.center;
        if u.norm() == 0.0 {
            return ZERO;
        }
        let (r, _, _) = self.radius_jet(u.arg());
        u / r
    }

    /// Inverse of the radial extension: w -> center + r(arg w) w.
    pub fn inverse(&self, w: Complex64) -> Complex64 {
        if w.norm() == 0.0 {
            return self.center;
        }
        let (r, _, _) = self.radius_jet(w.arg());
        self.center + r * w
    }
}

/// Which side of the base curve a family shrinks from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum FamilySide {
    Inside,
    Outside,
}

/// One sampled vertex of a generated curve.
#[derive(Clone, Copy, Debug)]
pub struct PointTangent {
    pub point: Complex64,
    /// Derivative of the generated curve with respect to the angle
    /// parameter.
    pub tangent: Complex64,
}

/// Measured shape constants for a family, from a fixed sample of scales.
#[derive(Clone, Debug)]
pub struct NicenessConstants {
    /// Uniform C with C^{-1} s <= dist(x, base curve) <= C s over samples.
    pub distance_comparability: f64,
    /// (s, two-sided Hausdorff distance to the base curve) pairs.
    pub hausdorff: Vec<(f64, f64)>,
}

/// One-parameter family of curves collapsing onto the base curve from one
/// side: the first-order jet of the inverse circle map applied to circles
/// of radius 1 + sigma, sigma = (+/-) beta s.
#[derive(Clone, Debug)]
pub struct CurveFamily {
    pub side: FamilySide,
    pub beta: f64,
    diffeo: CircleDiffeo,
    pub niceness: NicenessConstants,
}

/// Builds the family and measures its shape constants. `BetaTooLarge` when
/// the widest curve (s = 1) leaves the reach tube of the base curve or
/// degenerates.
pub fn nice_family(
    diffeo: &CircleDiffeo,
    side: FamilySide,
    beta: f64,
) -> Result<CurveFamily, CurveError> {
    assert!(beta > 0.0 && beta.is_finite(), "beta must be positive");
    let curve = diffeo.curve();
    let reach = curve.reach();
    let n_check = 256;

    let family = CurveFamily {
        side,
        beta,
        diffeo: diffeo.clone(),
        niceness: NicenessConstants {
            distance_comparability: 0.0,
            hausdorff: Vec::new(),
        },
    };

    // Simplicity of the widest curve.
    let pts = family.generate(1.0, n_check);
    let sep = n_check / 16;
    let floor = 1e-6 * curve.diameter();
    for a in 0..n_check {
        for b in a + sep..n_check {
            if n_check - (b - a) < sep {
                continue;
            }
            if (pts[a].point - pts[b].point).norm() < floor {
                return Err(CurveError::BetaTooLarge {
                    detail: format!("curve at s = 1 self-intersects near vertices {a} and {b}"),
                });
            }
        }
    }

    // The widest curve must stay within the tube where projection onto the
    // base curve is unique, otherwise level sets of different s overlap.
    let mut worst = 0.0f64;
    for pt in &pts {
        worst = worst.max(curve.project_flat(pt.point).distance);
    }
    if worst > reach * (1.0 + 1e-9) {
        return Err(CurveError::BetaTooLarge {
            detail: format!(
                "curve at s = 1 reaches distance {worst:.4e}, beyond the reach {reach:.4e}"
            ),
        });
    }

    let mut family = family;
    family.niceness = measure_niceness(&family)?;
    Ok(family)
}

fn measure_niceness(family: &CurveFamily) -> Result<NicenessConstants, CurveError> {
    let curve = family.diffeo.curve();
    let n = 96;
    let mut comparability = 1.0f64;
    let mut hausdorff = Vec::new();
    for &s in &[1.0, 0.5, 0.25, 0.125] {
        let pts = family.generate(s, n);
        let mut sup_dist = 0.0f64;
        for pt in &pts {
            let d = curve.project_flat(pt.point).distance;
            if d <= 0.0 {
                return Err(CurveError::BetaTooLarge {
                    detail: format!("curve at s = {s} touches the base curve"),
                });
            }
            comparability = comparability.max(d / s).max(s / d);
            sup_dist = sup_dist.max(d);
        }
        // Reverse direction of the Hausdorff distance: base-curve samples
        // against the generated polyline.
        let mut sup_rev = 0.0f64;
        for i in 0..n {
            let t = TAU * i as f64 / n as f64;
            let q = curve.psi(t);
            let mut best = f64::INFINITY;
            for j in 0..n {
                let a = pts[j].point;
                let b = pts[(j + 1) % n].point;
                best = best.min(point_segment_distance(q, a, b));
            }
            sup_rev = sup_rev.max(best);
        }
        hausdorff.push((s, sup_dist.max(sup_rev)));
    }
    Ok(NicenessConstants {
        distance_comparability: comparability,
        hausdorff,
    })
}

fn point_segment_distance(q: Complex64, a: Complex64, b: Complex64) -> f64 {
    let ab = b - a;
    let denom = ab.norm_sqr();
    if denom == 0.0 {
        return (q - a).norm();
    }
    let u = ((q - a).conj() * ab).re / denom;
    let u = u.clamp(0.0, 1.0);
    (q - (a + u * ab)).norm()
}

impl CurveFamily {
    /// Signed displacement for scale s: positive outside, negative inside.
    pub fn sigma(&self, s: f64) -> f64 {
        match self.side {
            FamilySide::Outside => self.beta * s,
            FamilySide::Inside => -self.beta * s,
        }
    }

    pub fn diffeo(&self) -> &CircleDiffeo {
        &self.diffeo
    }

    pub fn base_curve(&self) -> &JordanCurve {
        self.diffeo.curve()
    }

    /// Discretizes the curve at scale `s` into `n` angle-uniform vertices
    /// with angle-derivative tangents.
    pub fn generate(&self, s: f64, n: usize) -> Vec<PointTangent> {
        assert!(s > 0.0 && s <= 1.0, "scale must lie in (0, 1]");
        let sigma = self.sigma(s);
        let isigma = Complex64::new(0.0, sigma);
        (0..n)
            .map(|j| {
                let theta = TAU * j as f64 / n as f64;
                let (p, p1, p2) = self.diffeo.point_jet(theta);
                PointTangent {
                    point: p - isigma * p1,
                    tangent: p1 - isigma * p2,
                }
            })
            .collect()
    }
}

/// Sampling plan for the length-density measurement.
#[derive(Clone, Debug)]
pub struct AhlforsSampleSpec {
    pub s_values: Vec<f64>,
    pub points_per_curve: usize,
    pub centers_per_curve: usize,
    pub dyadic_levels: usize,
    /// Largest ball radius as a fraction of the base-curve diameter.
    pub max_radius_fraction: f64,
}

impl Default for AhlforsSampleSpec {
    fn default() -> Self {
        AhlforsSampleSpec {
            s_values: (0..8).map(|j| 0.5f64.powi(j)).collect(),
            points_per_curve: 512,
            centers_per_curve: 64,
            dyadic_levels: 6,
            max_radius_fraction: 0.25,
        }
    }
}

/// Supremum over sampled scales, ball centers on the curves, and dyadic
/// radii of length(curve inside ball) / radius.
pub fn ahlfors_constant(family: &CurveFamily, spec: &AhlforsSampleSpec) -> f64 {
    let r_max = spec.max_radius_fraction * family.base_curve().diameter();
    let mut sup = 0.0f64;
    for &s in &spec.s_values {
        let pts = family.generate(s, spec.points_per_curve);
        let n = pts.len();
        let stride = (n / spec.centers_per_curve).max(1);
        for ci in (0..n).step_by(stride) {
            let x = pts[ci].point;
            for lvl in 0..spec.dyadic_levels {
                let r = r_max * 0.5f64.powi(lvl as i32);
                let mut len = 0.0;
                for j in 0..n {
                    let a = pts[j].point;
                    let b = pts[(j + 1) % n].point;
                    len += segment_length_in_ball(a, b, x, r);
                }
                sup = sup.max(len / r);
            }
        }
    }
    sup
}

fn segment_length_in_ball(a: Complex64, b: Complex64, x: Complex64, r: f64) -> f64 {
    let d = b - a;
    let f = a - x;
    let aa = d.norm_sqr();
    if aa == 0.0 {
        return 0.0;
    }
    let bb = 2.0 * (f.conj() * d).re;
    let cc = f.norm_sqr() - r * r;
    let disc = bb * bb - 4.0 * aa * cc;
    if disc <= 0.0 {
        return 0.0;
    }
    let sq = disc.sqrt();
    let u0 = ((-bb - sq) / (2.0 * aa)).clamp(0.0, 1.0);
    let u1 = ((-bb + sq) / (2.0 * aa)).clamp(0.0, 1.0);
    (u1 - u0) * aa.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle() -> JordanCurve {
        JordanCurve::builtin("circle").unwrap()
    }

    fn ellipse() -> JordanCurve {
        JordanCurve::builtin("ellipse:2:1").unwrap()
    }

    #[test]
    fn builtin_shapes_and_degrees() {
        assert_eq!(circle().degree(), 1);
        let c2 = JordanCurve::builtin("circle:2").unwrap();
        assert!((c2.psi(0.0) - Complex64::new(2.0, 0.0)).norm() < 1e-14);
        let e = ellipse();
        assert!((e.psi(0.0) - Complex64::new(2.0, 0.0)).norm() < 1e-14);
        assert!((e.psi(std::f64::consts::FRAC_PI_2) - Complex64::new(0.0, 1.0)).norm() < 1e-14);
        let blob = JordanCurve::builtin("blob:7").unwrap();
        for k in -8i64..=8 {
            if k == 0 || k == 1 {
                continue;
            }
            assert!(blob.coeff(k).norm() <= 0.05 / (k * k) as f64 + 1e-15);
        }
        assert!(JordanCurve::builtin("square").is_err());
        assert!(JordanCurve::builtin("ellipse:2").is_err());
    }

    #[test]
    fn rejects_bad_curves() {
        // Clockwise circle.
        let cw = JordanCurve::new(&[(-1, Complex64::new(1.0, 0.0))], 64.0);
        assert!(matches!(cw, Err(CurveError::NotCounterclockwise)));
        // Figure-like self-intersecting combination.
        let selfx = JordanCurve::new(
            &[
                (1, Complex64::new(1.0, 0.0)),
                (2, Complex64::new(0.8, 0.0)),
            ],
            64.0,
        );
        assert!(selfx.is_err());
        let toobig = JordanCurve::new(&[(65, Complex64::new(0.001, 0.0))], 64.0);
        assert!(matches!(toobig, Err(CurveError::TooManyModes(65))));
    }

    #[test]
    fn projection_closed_form_cases() {
        let c = circle();
        let p = c.project(Complex64::new(2.0, 0.0)).unwrap();
        assert!((p.point - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!((p.distance - 1.0).abs() < 1e-12);
        assert_eq!(p.side, Side::Exterior);

        let p = c.project(Complex64::new(0.0, 0.5)).unwrap();
        assert!((p.point - Complex64::new(0.0, 1.0)).norm() < 1e-12);
        assert!((p.distance - 0.5).abs() < 1e-12);
        assert_eq!(p.side, Side::Interior);

        let e = ellipse();
        let p = e.project(Complex64::new(3.0, 0.0)).unwrap();
        assert!((p.point - Complex64::new(2.0, 0.0)).norm() < 1e-10);
        assert!((p.distance - 1.0).abs() < 1e-12);
        assert_eq!(p.side, Side::Exterior);
    }

    #[test]
    fn projection_center_is_ambiguous_with_deterministic_choice() {
        let c = circle();
        match c.project(Complex64::new(0.0, 0.0)) {
            Err(CurveError::AmbiguousProjection { choice, .. }) => {
                assert!((choice.point - Complex64::new(1.0, 0.0)).norm() < 1e-9);
                assert!((choice.distance - 1.0).abs() < 1e-12);
                assert_eq!(choice.side, Side::Interior);
            }
            other => panic!("expected ambiguity, got {other:?}"),
        }
        let flat = c.project_flat(Complex64::new(0.0, 0.0));
        assert!((flat.distance - 1.0).abs() < 1e-12);
    }

    #[test]
    fn projection_distance_is_lipschitz() {
        let e = JordanCurve::builtin("blob:3").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..60 {
            let z1 = Complex64::new(rng.gen::<f64>() * 4.0 - 2.0, rng.gen::<f64>() * 4.0 - 2.0);
            let z2 = z1
                + Complex64::new(
                    (rng.gen::<f64>() - 0.5) * 0.3,
                    (rng.gen::<f64>() - 0.5) * 0.3,
                );
            let d1 = e.project_flat(z1).distance;
            let d2 = e.project_flat(z2).distance;
            assert!(
                (d1 - d2).abs() <= (z1 - z2).norm() + 1e-11,
                "lipschitz violated: {} vs step {}",
                (d1 - d2).abs(),
                (z1 - z2).norm()
            );
        }
    }

    #[test]
    fn reach_of_known_shapes() {
        assert!((circle().reach() - 1.0).abs() < 1e-3);
        let e = JordanCurve::builtin("ellipse:1.2:1").unwrap();
        assert!((e.reach() - 1.0 / 1.2).abs() < 5e-3, "reach {}", e.reach());
    }

    #[test]
    fn radial_map_on_circles_is_scaling() {
        let d = radial_diffeo(&circle(), None).unwrap();
        for j in 0..16 {
            let t = TAU * j as f64 / 16.0;
            let w = d.boundary_values(t);
            assert!((w - Complex64::from_polar(1.0, t)).norm() < 1e-12);
        }
        let c2 = JordanCurve::builtin("circle:2").unwrap();
        let d2 = radial_diffeo(&c2, None).unwrap();
        let z = Complex64::new(1.1, 0.7);
        assert!((d2.forward(z) - z / 2.0).norm() < 1e-12);
        assert!((d2.inverse(z / 2.0) - z).norm() < 1e-12);
    }

    #[test]
    fn radial_map_round_trips_on_general_curves() {
        for name in ["ellipse:1.2:1", "blob:5"] {
            let c = JordanCurve::builtin(name).unwrap();
            let d = radial_diffeo(&c, None).unwrap();
            for j in 0..40 {
                let t = 0.05 + TAU * j as f64 / 40.0;
                let on_curve = c.psi(t);
                let w = d.boundary_values(t);
                assert!((w.norm() - 1.0).abs() < 1e-13);
                let back = d.inverse(w);
                assert!(
                    (back - on_curve).norm() < 1e-10,
                    "round trip failed on {name} at t = {t}: {}",
                    (back - on_curve).norm()
                );
                let off = Complex64::from_polar(1.07, w.arg());
                let fwd = d.forward(d.inverse(off));
                assert!((fwd - off).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn spectral_and_chain_rule_derivatives_agree() {
        let c = JordanCurve::builtin("ellipse:1.2:1").unwrap();
        let d = radial_diffeo(&c, None).unwrap();
        let m = c.grid_size();
        let samples = d.tangential_derivative_samples();
        let mut worst = 0.0f64;
        for i in 0..m {
            let t = TAU * i as f64 / m as f64;
            worst = worst.max((samples[i] - d.tangential_derivative(t)).norm());
        }
        assert!(worst < 1e-8, "spectral vs chain rule gap {worst}");
    }

    #[test]
    fn exterior_center_is_not_star_shaped() {
        let c = circle();
        let r = radial_diffeo(&c, Some(Complex64::new(3.0, 0.0)));
        assert!(matches!(r, Err(CurveError::NotStarShaped { .. })));
    }

    #[test]
    fn point_jet_matches_finite_differences() {
        let c = JordanCurve::builtin("blob:5").unwrap();
        let d = radial_diffeo(&c, None).unwrap();
        let h = 1e-5;
        for j in 0..12 {
            let theta = 0.3 + TAU * j as f64 / 12.0;
            let (p, p1, p2) = d.point_jet(theta);
            let (pp, _, _) = d.point_jet(theta + h);
            let (pm, _, _) = d.point_jet(theta - h);
            let fd1 = (pp - pm) / (2.0 * h);
            let fd2 = (pp - 2.0 * p + pm) / (h * h);
            assert!((fd1 - p1).norm() < 1e-7 * (1.0 + p1.norm()), "first jet");
            assert!((fd2 - p2).norm() < 1e-4 * (1.0 + p2.norm()), "second jet");
        }
    }

    #[test]
    fn family_on_unit_circle_gives_exact_concentric_circles() {
        let d = radial_diffeo(&circle(), None).unwrap();
        for (side, sign) in [(FamilySide::Outside, 1.0), (FamilySide::Inside, -1.0)] {
            let fam = nice_family(&d, side, 0.5).unwrap();
            for &s in &[1.0, 0.37, 0.02] {
                let pts = fam.generate(s, 64);
                let rho = 1.0 + sign * 0.5 * s;
                for (j, pt) in pts.iter().enumerate() {
                    let theta = TAU * j as f64 / 64.0;
                    let expect = Complex64::from_polar(rho, theta);
                    assert!(
                        (pt.point - expect).norm() <= 1e-12,
                        "vertex error {}",
                        (pt.point - expect).norm()
                    );
                }
            }
        }
    }

    #[test]
    fn family_niceness_constants_are_finite_and_tight() {
        let c = JordanCurve::builtin("ellipse:1.2:1").unwrap();
        let d = radial_diffeo(&c, None).unwrap();
        let fam = nice_family(&d, FamilySide::Outside, 0.2).unwrap();
        let cb = fam.niceness.distance_comparability;
        assert!(cb.is_finite() && cb >= 1.0 && cb < 20.0, "C = {cb}");
        let h = &fam.niceness.hausdorff;
        for w in h.windows(2) {
            assert!(w[1].1 < w[0].1, "hausdorff not decreasing: {h:?}");
        }
        assert!(h.last().unwrap().1 < 0.2 * 0.125 * 1.5);
    }

    #[test]
    fn oversized_beta_is_rejected() {
        let c = JordanCurve::builtin("ellipse:1.2:1").unwrap();
        let d = radial_diffeo(&c, None).unwrap();
        assert!(matches!(
            nice_family(&d, FamilySide::Outside, 5.0),
            Err(CurveError::BetaTooLarge { .. })
        ));
    }

    #[test]
    fn ahlfors_constant_for_circle_family() {
        let d = radial_diffeo(&circle(), None).unwrap();
        let fam = nice_family(&d, FamilySide::Outside, 0.5).unwrap();
        let spec = AhlforsSampleSpec::default();
        let v = ahlfors_constant(&fam, &spec);
        assert!((2.0..=2.1).contains(&v), "constant {v}");

        let mut dense = spec.clone();
        dense.points_per_curve *= 2;
        dense.centers_per_curve *= 2;
        let v2 = ahlfors_constant(&fam, &dense);
        assert!(
            (v2 - v).abs() / v < 0.05,
            "density doubling moved the constant from {v} to {v2}"
        );
    }

    #[test]
    fn ahlfors_constant_finite_for_ellipse_family() {
        let c = JordanCurve::builtin("ellipse:1.2:1").unwrap();
        let d = radial_diffeo(&c, None).unwrap();
        let fam = nice_family(&d, FamilySide::Outside, 0.2).unwrap();
        let v = ahlfors_constant(&fam, &AhlforsSampleSpec::default());
        assert!(v.is_finite() && v > 1.9 && v < 4.0, "constant {v}");
    }

    #[test]
    fn curve_and_circle_distances_are_comparable_in_the_tube() {
        let c = JordanCurve::builtin("ellipse:1.2:1").unwrap();
        let d = radial_diffeo(&c, None).unwrap();
        let mut ratios = Vec::new();
        for (side, sign) in [(FamilySide::Outside, 1.0), (FamilySide::Inside, -1.0)] {
            let _ = sign;
            let fam = nice_family(&d, side, 0.2).unwrap();
            for &s in &[1.0, 0.3, 0.05] {
                for pt in fam.generate(s, 32) {
                    let dist_curve = c.project_flat(pt.point).distance;
                    let dist_circle = (d.forward(pt.point).norm() - 1.0).abs();
                    ratios.push(dist_curve / dist_circle);
                }
            }
        }
        let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().cloned().fold(0.0f64, f64::max);
        assert!(lo > 0.0 && hi.is_finite());
        assert!(hi / lo < 10.0, "ratio spread [{lo}, {hi}]");
    }

    #[test]
    fn spectral_derivative_of_trig_polynomial_is_exact() {
        let n = 128;
        let samples: Vec<Complex64> = (0..n)
            .map(|i| {
                let t = TAU * i as f64 / n as f64;
                Complex64::from_polar(1.0, 2.0 * t) + 0.5 * Complex64::from_polar(1.0, -5.0 * t)
            })
            .collect();
        let deriv = spectral_derivative(&samples);
        for i in 0..n {
            let t = TAU * i as f64 / n as f64;
            let expect = Complex64::new(0.0, 2.0) * Complex64::from_polar(1.0, 2.0 * t)
                + Complex64::new(0.0, -2.5) * Complex64::from_polar(1.0, -5.0 * t);
            assert!((deriv[i] - expect).norm() < 1e-11);
        }
    }

    #[test]
    fn curve_file_round_trip() {
        let c = JordanCurve::builtin("blob:9").unwrap();
        let data = c.file_data();
        let back = JordanCurve::from_file_data(&data, DEFAULT_GRID_DENSITY).unwrap();
        for j in 0..24 {
            let t = TAU * j as f64 / 24.0;
            assert!((c.psi(t) - back.psi(t)).norm() < 1e-14);
        }
    }
}
