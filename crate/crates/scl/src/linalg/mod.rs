//! Dense complex linear algebra kernels: LU solves, Schur and Hermitian
//! eigendecompositions, singular-value extremes, resolvent norms, numerical
//! radius, and PSD square roots.
//!
//! Everything here is deterministic: iterative kernels start from a fixed
//! internal seed, so repeated calls on the same data give bit-identical
//! results regardless of threading in the callers.

mod hermitian;
mod lu;
mod schur;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use hermitian::{hermitian_eigen, symtri_eigenvalues};
pub use lu::Lu;
pub use schur::{eigen_pairs, eigenvalues, schur, Schur};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Errors from the dense kernels.
#[derive(Debug, Error)]
pub enum LinalgError {
    /// The shifted matrix is singular to working precision: the smallest
    /// singular value fell below the configured floor, meaning the shift is
    /// effectively an eigenvalue.
    #[error("resolvent is singular: smallest singular value {sigma_min:.3e} under floor {floor:.3e}")]
    SingularResolvent { sigma_min: f64, floor: f64 },
    /// An eigenvalue iteration ran out of its sweep budget.
    #[error("{what} did not converge within {iterations} iterations")]
    ConvergenceFailure { what: &'static str, iterations: usize },
    /// Input to `psd_sqrt` was not Hermitian positive semidefinite.
    #[error("matrix is not positive semidefinite: {detail}")]
    NotPsd { detail: String },
}

/// Dense square complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    /// Wraps row-major entries; `data.len()` must equal `n * n`.
    pub fn new(n: usize, data: Vec<Complex64>) -> Self {
        assert_eq!(data.len(), n * n, "entry count must be n^2");
        assert!(
            data.iter().all(|z| z.re.is_finite() && z.im.is_finite()),
            "matrix entries must be finite"
        );
        ComplexMatrix { n, data }
    }

    pub fn zeros(n: usize) -> Self {
        ComplexMatrix { n, data: vec![ZERO; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn from_diag(diag: &[Complex64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, d) in diag.iter().enumerate() {
            m.set(i, i, *d);
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.n + j] = v;
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let data = self
            .data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| a + b)
            .collect();
        ComplexMatrix { n: self.n, data }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let data = self
            .data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| a - b)
            .collect();
        ComplexMatrix { n: self.n, data }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        ComplexMatrix {
            n: self.n,
            data: self.data.iter().map(|a| a * c).collect(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        let n = self.n;
        Self::from_fn(n, |i, j| self.get(j, i).conj())
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.n);
        let n = self.n;
        (0..n)
            .map(|i| {
                let mut s = ZERO;
                for j in 0..n {
                    s += self.data[i * n + j] * x[j];
                }
                s
            })
            .collect()
    }

    pub fn adjoint_mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.n);
        let n = self.n;
        (0..n)
            .map(|j| {
                let mut s = ZERO;
                for i in 0..n {
                    s += self.data[i * n + j].conj() * x[i];
                }
                s
            })
            .collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `self - c I`.
    pub fn shift(&self, c: Complex64) -> Self {
        let mut m = self.clone();
        for i in 0..self.n {
            let cur = m.get(i, i);
            m.set(i, i, cur - c);
        }
        m
    }
}

/// Euclidean norm of a complex vector.
pub fn vec_norm(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Condition/flag pair describing how well the eigenvector matrix inverts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DiagonalizerCondition {
    /// Condition number of the unit-column eigenvector matrix.
    Value(f64),
    /// Eigenvector matrix is rank deficient to working tolerance.
    NonDiagonalizable,
}

impl DiagonalizerCondition {
    pub fn value(&self) -> Option<f64> {
        match self {
            DiagonalizerCondition::Value(v) => Some(*v),
            DiagonalizerCondition::NonDiagonalizable => None,
        }
    }
}

/// Eigenvalues plus similarity diagnostics.
#[derive(Clone, Debug)]
pub struct Spectrum {
    /// All n eigenvalues, with multiplicity, in Schur order.
    pub eigenvalues: Vec<Complex64>,
    /// Conditioning of the unit-column eigenvector matrix, or the
    /// non-diagonalizable flag when that matrix is numerically singular.
    pub diagonalizer_condition: DiagonalizerCondition,
    /// Operator norm of T*T - TT*.
    pub normality_defect: f64,
}

fn deterministic_unit_vector(n: usize) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5CA1_AB1E);
    let mut x: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(rng.gen::<f64>() * 2.0 - 1.0, rng.gen::<f64>() * 2.0 - 1.0))
        .collect();
    let norm = vec_norm(&x).max(f64::MIN_POSITIVE);
    for v in &mut x {
        *v /= norm;
    }
    x
}

fn deterministic_block(n: usize, b: usize) -> Vec<Vec<Complex64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5CA1_AB1E);
    let mut block: Vec<Vec<Complex64>> = (0..b)
        .map(|_| {
            (0..n)
                .map(|_| {
                    Complex64::new(rng.gen::<f64>() * 2.0 - 1.0, rng.gen::<f64>() * 2.0 - 1.0)
                })
                .collect()
        })
        .collect();
    orthonormalize(&mut block);
    block
}

/// Modified Gram-Schmidt with one re-orthogonalization pass. A column that
/// collapses is replaced by a standard basis vector and the pass repeats,
/// so the block always comes back orthonormal and full rank.
fn orthonormalize(block: &mut [Vec<Complex64>]) {
    let n = block.first().map_or(0, Vec::len);
    for j in 0..block.len() {
        let mut fills = 0;
        loop {
            for _ in 0..2 {
                for i in 0..j {
                    let proj: Complex64 = block[i]
                        .iter()
                        .zip(block[j].iter())
                        .map(|(a, b)| a.conj() * b)
                        .sum();
                    for k in 0..n {
                        let correction = proj * block[i][k];
                        block[j][k] -= correction;
                    }
                }
            }
            let norm = vec_norm(&block[j]);
            if norm > 1e-150 {
                for v in &mut block[j] {
                    *v /= norm;
                }
                break;
            }
            for (k, v) in block[j].iter_mut().enumerate() {
                *v = Complex64::new(f64::from(k == fills % n), 0.0);
            }
            fills += 1;
        }
    }
}

/// Smallest singular value, by block inverse iteration on `M* M` driven by
/// one LU factorization, with Rayleigh-Ritz extraction on the block. The
/// block width of three resolves clusters of nearly equal small singular
/// values that stall single-vector iteration. Returns 0 for an exactly
/// singular factorization.
pub fn sigma_min(m: &ComplexMatrix) -> f64 {
    let n = m.dim();
    if n == 0 {
        return 0.0;
    }
    if n == 1 {
        return m.get(0, 0).norm();
    }
    let lu = Lu::factor(m);
    if lu.min_pivot() == 0.0 {
        return 0.0;
    }
    let b = 3.min(n);
    let mut xs = deterministic_block(n, b);
    let mut mu_prev = 0.0f64;
    let mut mu = 0.0f64;
    for it in 0..400 {
        let mut ws = Vec::with_capacity(b);
        for x in &xs {
            let mut w = x.clone();
            lu.solve_adjoint_in_place(&mut w);
            lu.solve_in_place(&mut w);
            let norm = vec_norm(&w);
            if !norm.is_finite() || norm > 1e280 {
                return 0.0;
            }
            ws.push(w);
        }
        // With X orthonormal and W = (M* M)^{-1} X, the matrix X* W is the
        // Rayleigh-Ritz compression; its top eigenvalue estimates
        // 1 / sigma_min^2.
        let h = ComplexMatrix::from_fn(b, |i, j| {
            let raw: Complex64 = xs[i]
                .iter()
                .zip(ws[j].iter())
                .map(|(a, w)| a.conj() * w)
                .sum();
            if i == j {
                Complex64::new(raw.re, 0.0)
            } else {
                raw
            }
        });
        let h = h.add(&h.adjoint()).scale(Complex64::new(0.5, 0.0));
        match hermitian_eigen(&h) {
            Ok((vals, _)) => mu = vals.last().copied().unwrap_or(0.0),
            Err(_) => return 0.0,
        }
        if !mu.is_finite() || mu > 1e280 {
            return 0.0;
        }
        orthonormalize(&mut ws);
        xs = ws;
        if it > 2 && (mu - mu_prev).abs() <= 1e-13 * mu.max(f64::MIN_POSITIVE) {
            break;
        }
        mu_prev = mu;
    }
    if mu <= 0.0 {
        0.0
    } else {
        1.0 / mu.sqrt()
    }
}

/// Operator (spectral) norm. Exact Hermitian eigensolve of `M* M` at small
/// dimension, power iteration beyond that.
pub fn operator_norm(m: &ComplexMatrix) -> f64 {
    let n = m.dim();
    if n == 0 {
        return 0.0;
    }
    if n == 1 {
        return m.get(0, 0).norm();
    }
    if n <= 160 {
        let mut c = m.adjoint().matmul(m);
        for i in 0..n {
            let v = c.get(i, i);
            c.set(i, i, Complex64::new(v.re, 0.0));
        }
        match hermitian_eigen(&c) {
            Ok((vals, _)) => vals.last().copied().unwrap_or(0.0).max(0.0).sqrt(),
            Err(_) => power_iteration_norm(m),
        }
    } else {
        power_iteration_norm(m)
    }
}

fn power_iteration_norm(m: &ComplexMatrix) -> f64 {
    let n = m.dim();
    let mut x = deterministic_unit_vector(n);
    let mut nu_prev = 0.0f64;
    let mut nu = 0.0f64;
    for it in 0..500 {
        let u = m.mul_vec(&x);
        let y = m.adjoint_mul_vec(&u);
        nu = vec_norm(&u).powi(2);
        let ny = vec_norm(&y);
        if ny == 0.0 {
            return 0.0;
        }
        for (xv, yv) in x.iter_mut().zip(y.iter()) {
            *xv = yv / ny;
        }
        if it > 2 && (nu - nu_prev).abs() <= 1e-13 * nu.max(f64::MIN_POSITIVE) {
            break;
        }
        nu_prev = nu;
    }
    nu.sqrt()
}

/// Norm of the resolvent, `1 / sigma_min(T - lambda I)`.
///
/// The singularity floor defaults to `1e-14` times the Frobenius norm of T;
/// shifts closer to the spectrum than that raise `SingularResolvent`.
pub fn resolvent_norm(t: &ComplexMatrix, lambda: Complex64) -> Result<f64, LinalgError> {
    let m = t.shift(lambda);
    let floor = 1e-14 * t.frobenius_norm();
    let sig = sigma_min(&m);
    if sig <= floor || sig == 0.0 {
        return Err(LinalgError::SingularResolvent { sigma_min: sig, floor });
    }
    Ok(1.0 / sig)
}

/// Eigenvalues, diagonalizer conditioning, and normality defect.
///
/// The eigenvector matrix has unit columns; it is flagged non-diagonalizable
/// when its smallest singular value falls under `1e-10` times its largest.
pub fn spectrum(t: &ComplexMatrix) -> Result<Spectrum, LinalgError> {
    let (vals, v) = eigen_pairs(t)?;
    let smax = operator_norm(&v);
    let smin = sigma_min(&v);
    let diagonalizer_condition = if smin < 1e-10 * smax {
        DiagonalizerCondition::NonDiagonalizable
    } else {
        DiagonalizerCondition::Value(smax / smin)
    };
    let comm = t.adjoint().matmul(t).sub(&t.matmul(&t.adjoint()));
    let normality_defect = operator_norm(&comm);
    Ok(Spectrum {
        eigenvalues: vals,
        diagonalizer_condition,
        normality_defect,
    })
}

/// Numerical radius by sweeping the largest eigenvalue of `Re(e^{i theta} T)`
/// over a uniform grid of angles. Monotone non-decreasing under refinement.
pub fn numerical_radius(t: &ComplexMatrix, theta_count: usize) -> Result<f64, LinalgError> {
    assert!(theta_count >= 8, "need at least 8 angles");
    let n = t.dim();
    let mut best = f64::NEG_INFINITY;
    for j in 0..theta_count {
        let theta = 2.0 * std::f64::consts::PI * j as f64 / theta_count as f64;
        let phase = Complex64::from_polar(1.0, theta);
        let rt = t.scale(phase);
        let mut h = rt.add(&rt.adjoint()).scale(Complex64::new(0.5, 0.0));
        for i in 0..n {
            let v = h.get(i, i);
            h.set(i, i, Complex64::new(v.re, 0.0));
        }
        let (vals, _) = hermitian_eigen(&h)?;
        best = best.max(vals.last().copied().unwrap_or(0.0));
    }
    Ok(best)
}

/// Hermitian PSD square root via eigendecomposition.
///
/// Eigenvalues below `-1e-10 * max(|eig|, 1)` reject the input; small
/// negative rounding noise above that is clamped to zero.
pub fn psd_sqrt(m: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    let n = m.dim();
    let herm_defect = m.sub(&m.adjoint()).frobenius_norm();
    if herm_defect > 1e-8 * m.frobenius_norm().max(1.0) {
        return Err(LinalgError::NotPsd {
            detail: format!("Hermitian defect {herm_defect:.3e}"),
        });
    }
    let mut h = m.add(&m.adjoint()).scale(Complex64::new(0.5, 0.0));
    for i in 0..n {
        let v = h.get(i, i);
        h.set(i, i, Complex64::new(v.re, 0.0));
    }
    let (vals, q) = hermitian_eigen(&h)?;
    let scale = vals.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    let tol = 1e-10 * scale;
    if let Some(bad) = vals.iter().find(|v| **v < -tol) {
        return Err(LinalgError::NotPsd {
            detail: format!("negative eigenvalue {bad:.6e}"),
        });
    }
    let mut s = ComplexMatrix::zeros(n);
    for (i, v) in vals.iter().enumerate() {
        s.set(i, i, Complex64::new(v.max(0.0).sqrt(), 0.0));
    }
    Ok(q.matmul(&s).matmul(&q.adjoint()))
}


#[cfg(test)]
mod tests {
    use super::*;
    use test_support::seeded_matrix;

    #[test]
    fn resolvent_norm_of_normal_diag() {
        let t = ComplexMatrix::from_diag(&[
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, -1.0),
        ]);
        let r = resolvent_norm(&t, ZERO).unwrap();
        assert!((r - 1.0).abs() < 1e-10, "norm {r}");
    }

    #[test]
    fn resolvent_norm_scalar_cases() {
        let t = ComplexMatrix::zeros(2);
        let r = resolvent_norm(&t, Complex64::new(2.0, 0.0)).unwrap();
        assert!((r - 0.5).abs() < 1e-12);
    }

    #[test]
    fn resolvent_norm_matches_explicit_two_by_two_inverse() {
        // T = [[0,1],[0,0]], lambda = 0.1: inverse of (T - lambda) is
        // -1/lambda^2 [[lambda, 1],[0, lambda]], largest singular value
        // computed from the 2x2 Gram closed form.
        let mut t = ComplexMatrix::zeros(2);
        t.set(0, 1, Complex64::new(1.0, 0.0));
        let lam = 0.1f64;
        let got = resolvent_norm(&t, Complex64::new(lam, 0.0)).unwrap();
        let a = 1.0 / (lam * lam);
        let b = lam * lam;
        // Gram eigenvalue: a^2 * (1 + 2 b^2 + sqrt(1 + 4 b^2)) / 2 with the
        // inverse written as a * [[lam, 1], [0, lam]].
        let top = a * a * (2.0 * b + 1.0 + (4.0 * b + 1.0).sqrt()) / 2.0;
        let expect = top.sqrt();
        assert!(
            (got - expect).abs() < 1e-9 * expect,
            "got {got} expect {expect}"
        );
    }

    #[test]
    fn singular_resolvent_detected() {
        let t = ComplexMatrix::from_diag(&[Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.0)]);
        let err = resolvent_norm(&t, Complex64::new(1.0, 0.0));
        assert!(matches!(err, Err(LinalgError::SingularResolvent { .. })));
    }

    #[test]
    fn spectrum_of_diagonal() {
        let t = ComplexMatrix::from_diag(&[Complex64::new(2.0, 0.0), Complex64::new(3.0, 0.0)]);
        let s = spectrum(&t).unwrap();
        let cond = s.diagonalizer_condition.value().unwrap();
        assert!((cond - 1.0).abs() < 1e-8, "condition {cond}");
        assert!(s.normality_defect < 1e-12);
    }

    #[test]
    fn spectrum_flags_jordan_block() {
        let mut t = ComplexMatrix::zeros(2);
        t.set(0, 0, Complex64::new(1.0, 0.0));
        t.set(0, 1, Complex64::new(1.0, 0.0));
        t.set(1, 1, Complex64::new(1.0, 0.0));
        let s = spectrum(&t).unwrap();
        assert_eq!(
            s.diagonalizer_condition,
            DiagonalizerCondition::NonDiagonalizable
        );
    }

    #[test]
    fn spectrum_condition_of_shear_similarity() {
        // S diag(1,-1) S^{-1} with S = [[1,1],[0,1]] equals [[1,-2],[0,-1]];
        // its unit eigenvectors are e1 and (1,1)/sqrt(2), so the unit-column
        // eigenbasis satisfies kappa^2 = (1+c)/(1-c) with c = 1/sqrt(2),
        // giving kappa = 1 + sqrt(2).
        let s = ComplexMatrix::new(
            2,
            vec![
                Complex64::new(1.0, 0.0),
                Complex64::new(1.0, 0.0),
                ZERO,
                Complex64::new(1.0, 0.0),
            ],
        );
        let d = ComplexMatrix::from_diag(&[Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)]);
        let si = ComplexMatrix::new(
            2,
            vec![
                Complex64::new(1.0, 0.0),
                Complex64::new(-1.0, 0.0),
                ZERO,
                Complex64::new(1.0, 0.0),
            ],
        );
        let t = s.matmul(&d).matmul(&si);
        let sp = spectrum(&t).unwrap();
        let got = sp.diagonalizer_condition.value().unwrap();
        let c = 1.0 / 2.0f64.sqrt();
        let expect = ((1.0 + c) / (1.0 - c)).sqrt();
        assert!(
            (got - expect).abs() < 1e-6 * expect,
            "kappa {got} expect {expect}"
        );
    }

    #[test]
    fn numerical_radius_identity_and_nilpotent() {
        let id = ComplexMatrix::identity(3);
        let w = numerical_radius(&id, 16).unwrap();
        assert!((w - 1.0).abs() < 1e-12);

        let mut nil = ComplexMatrix::zeros(2);
        nil.set(0, 1, Complex64::new(1.0, 0.0));
        let w = numerical_radius(&nil, 64).unwrap();
        assert!((w - 0.5).abs() < 1e-10, "w {w}");
    }

    #[test]
    fn numerical_radius_of_unitary_diag() {
        let t = ComplexMatrix::from_diag(&[
            Complex64::from_polar(1.0, 0.3),
            Complex64::from_polar(1.0, 1.1),
            Complex64::from_polar(1.0, 4.0),
        ]);
        let w = numerical_radius(&t, 256).unwrap();
        assert!(w <= 1.0 + 1e-12 && w > 1.0 - 1e-3, "w {w}");
    }

    #[test]
    fn psd_sqrt_diagonal_and_gram() {
        let m = ComplexMatrix::from_diag(&[Complex64::new(4.0, 0.0), Complex64::new(9.0, 0.0)]);
        let r = psd_sqrt(&m).unwrap();
        assert!((r.get(0, 0).re - 2.0).abs() < 1e-12);
        assert!((r.get(1, 1).re - 3.0).abs() < 1e-12);

        let a = seeded_matrix(5, 23);
        let m = a.adjoint().matmul(&a);
        let r = psd_sqrt(&m).unwrap();
        let err = r.matmul(&r).sub(&m).frobenius_norm();
        assert!(err <= 1e-10 * m.frobenius_norm().max(1.0), "residual {err}");
        let comm = r.matmul(&m).sub(&m.matmul(&r)).frobenius_norm();
        assert!(comm < 1e-10 * m.frobenius_norm(), "commutator {comm}");
    }

    #[test]
    fn psd_sqrt_rejects_indefinite() {
        let m = ComplexMatrix::from_diag(&[Complex64::new(1.0, 0.0), Complex64::new(-0.5, 0.0)]);
        assert!(matches!(psd_sqrt(&m), Err(LinalgError::NotPsd { .. })));
    }

    #[test]
    fn spectral_lower_bound_and_normal_identity() {
        let t = seeded_matrix(9, 31);
        let sp = spectrum(&t).unwrap();
        for probe in [
            Complex64::new(2.5, 0.3),
            Complex64::new(-1.0, 2.0),
            Complex64::new(0.1, -3.0),
        ] {
            let dist = sp
                .eigenvalues
                .iter()
                .map(|z| (z - probe).norm())
                .fold(f64::INFINITY, f64::min);
            let r = resolvent_norm(&t, probe).unwrap();
            assert!(r * dist >= 1.0 - 1e-8, "lower bound violated: {}", r * dist);
        }
    }

    #[test]
    fn operator_norm_vs_numerical_radius_bounds() {
        for seed in [3u64, 9, 27] {
            let t = seeded_matrix(7, seed);
            let w = numerical_radius(&t, 64).unwrap();
            let nrm = operator_norm(&t);
            assert!(w <= nrm + 1e-9, "w {w} > norm {nrm}");
            assert!(nrm <= 2.0 * w + 1e-9, "norm {nrm} > 2w {w}");
        }
    }

    #[test]
    fn operator_norm_power_iteration_path_matches_small_path() {
        let t = seeded_matrix(24, 77);
        let exact = operator_norm(&t);
        let power = power_iteration_norm(&t);
        assert!(
            (exact - power).abs() < 1e-8 * exact,
            "exact {exact} power {power}"
        );
    }
}
