//! Complex Schur decomposition: Householder reduction to Hessenberg form,
//! then single-shift QR with Givens chasing (Wilkinson shift, occasional
//! exceptional shift), with eigenvectors recovered from the triangular
//! factor by back-substitution.

use num_complex::Complex64;

use super::{ComplexMatrix, LinalgError};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Unitary similarity `a = q t q*` with `t` upper triangular.
pub struct Schur {
    pub q: ComplexMatrix,
    pub t: ComplexMatrix,
}

/// Complex Givens pair `(c, s)` with `c` real, `c^2 + |s|^2 = 1`, chosen so
/// that the row action `(c x + s y, -conj(s) x + c y)` annihilates `y`.
fn rot(x: Complex64, y: Complex64) -> (f64, Complex64) {
    let ay = y.norm();
    if ay == 0.0 {
        return (1.0, ZERO);
    }
    let ax = x.norm();
    if ax == 0.0 {
        return (0.0, y.conj() / ay);
    }
    let r0 = ax.hypot(ay);
    (ax / r0, x * y.conj() / (r0 * ax))
}

fn apply_left(h: &mut ComplexMatrix, i: usize, j: usize, c: f64, s: Complex64, col_from: usize) {
    let n = h.dim();
    for col in col_from..n {
        let a = h.get(i, col);
        let b = h.get(j, col);
        h.set(i, col, c * a + s * b);
        h.set(j, col, -s.conj() * a + c * b);
    }
}

fn apply_right(h: &mut ComplexMatrix, i: usize, j: usize, c: f64, s: Complex64, row_to: usize) {
    for row in 0..=row_to {
        let a = h.get(row, i);
        let b = h.get(row, j);
        h.set(row, i, c * a + s.conj() * b);
        h.set(row, j, -s * a + c * b);
    }
}

/// Householder reduction to upper Hessenberg form, `a = q h q*`.
fn hessenberg(a: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let n = a.dim();
    let mut h = a.clone();
    let mut q = ComplexMatrix::identity(n);
    let mut v = vec![ZERO; n];
    for k in 0..n.saturating_sub(2) {
        let mut norm_sq = 0.0;
        for i in k + 1..n {
            norm_sq += h.get(i, k).norm_sqr();
        }
        let norm = norm_sq.sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = h.get(k + 1, k);
        let phase = if x0.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * norm;
        let mut vv = 0.0;
        for i in k + 1..n {
            let vi = if i == k + 1 { h.get(i, k) - alpha } else { h.get(i, k) };
            v[i] = vi;
            vv += vi.norm_sqr();
        }
        if vv == 0.0 {
            continue;
        }
        let tau = 2.0 / vv;
        // Left: h <- h - tau v (v* h) on rows k+1.., cols k..
        for col in k..n {
            let mut s = ZERO;
            for i in k + 1..n {
                s += v[i].conj() * h.get(i, col);
            }
            let s = s * tau;
            for i in k + 1..n {
                let cur = h.get(i, col);
                h.set(i, col, cur - v[i] * s);
            }
        }
        // Right: h <- h - tau (h v) v* on cols k+1.., all rows.
        for row in 0..n {
            let mut s = ZERO;
            for j in k + 1..n {
                s += h.get(row, j) * v[j];
            }
            let s = s * tau;
            for j in k + 1..n {
                let cur = h.get(row, j);
                h.set(row, j, cur - s * v[j].conj());
            }
        }
        // q <- q (I - tau v v*)
        for row in 0..n {
            let mut s = ZERO;
            for j in k + 1..n {
                s += q.get(row, j) * v[j];
            }
            let s = s * tau;
            for j in k + 1..n {
                let cur = q.get(row, j);
                q.set(row, j, cur - s * v[j].conj());
            }
        }
        h.set(k + 1, k, alpha);
        for i in k + 2..n {
            h.set(i, k, ZERO);
        }
    }
    (h, q)
}

fn wilkinson_shift(h: &ComplexMatrix, hi: usize) -> Complex64 {
    let a = h.get(hi - 1, hi - 1);
    let b = h.get(hi - 1, hi);
    let c = h.get(hi, hi - 1);
    let d = h.get(hi, hi);
    let mid = (a + d) * 0.5;
    let disc = ((a - d) * 0.5 * ((a - d) * 0.5) + b * c).sqrt();
    let m1 = mid + disc;
    let m2 = mid - disc;
    if (m1 - d).norm() <= (m2 - d).norm() {
        m1
    } else {
        m2
    }
}

/// Schur form of a general complex matrix.
///
/// The iteration budget is 40 QR sweeps per eigenvalue in total; exceeding it
/// raises `ConvergenceFailure` (exceptional shifts every 12 stalled sweeps
/// make that outcome pathological in practice).
pub fn schur(a: &ComplexMatrix) -> Result<Schur, LinalgError> {
    let n = a.dim();
    let (mut h, mut q) = hessenberg(a);
    if n <= 1 {
        return Ok(Schur { q, t: h });
    }
    let cap = 40 * n;
    let mut total = 0usize;
    let mut hi = n - 1;
    let mut since_deflation = 0usize;
    loop {
        // Deflate converged subdiagonal entries at the active corner.
        while hi > 0 {
            let sub = h.get(hi, hi - 1).norm();
            let scale = h.get(hi - 1, hi - 1).norm() + h.get(hi, hi).norm();
            let thresh = f64::EPSILON * if scale > 0.0 { scale } else { h.frobenius_norm() };
            if sub <= thresh {
                h.set(hi, hi - 1, ZERO);
                hi -= 1;
                since_deflation = 0;
            } else {
                break;
            }
        }
        if hi == 0 {
            break;
        }
        let mut lo = hi;
        while lo > 0 {
            let sub = h.get(lo, lo - 1).norm();
            let scale = h.get(lo - 1, lo - 1).norm() + h.get(lo, lo).norm();
            let thresh = f64::EPSILON * if scale > 0.0 { scale } else { h.frobenius_norm() };
            if sub <= thresh {
                h.set(lo, lo - 1, ZERO);
                break;
            }
            lo -= 1;
        }
        total += 1;
        since_deflation += 1;
        if total > cap {
            return Err(LinalgError::ConvergenceFailure {
                what: "shifted QR eigenvalue sweep",
                iterations: total,
            });
        }
        let sigma = if since_deflation % 12 == 0 {
            // Exceptional shift to break symmetric stalls.
            h.get(hi, hi) + Complex64::new(0.75, 0.1) * h.get(hi, hi - 1).norm()
        } else {
            wilkinson_shift(&h, hi)
        };
        // Implicit single-shift chase from lo to hi.
        let mut x = h.get(lo, lo) - sigma;
        let mut y = h.get(lo + 1, lo);
        for k in lo..hi {
            let (c, s) = rot(x, y);
            apply_left(&mut h, k, k + 1, c, s, k.saturating_sub(1));
            apply_right(&mut h, k, k + 1, c, s, (k + 2).min(hi));
            apply_right(&mut q, k, k + 1, c, s, n - 1);
            if k + 2 <= hi {
                x = h.get(k + 1, k);
                y = h.get(k + 2, k);
            }
        }
    }
    // Clean the strict lower triangle.
    for i in 1..n {
        for j in 0..i {
            h.set(i, j, ZERO);
        }
    }
    Ok(Schur { q, t: h })
}

/// Eigenvalues with multiplicity, in Schur order.
pub fn eigenvalues(a: &ComplexMatrix) -> Result<Vec<Complex64>, LinalgError> {
    let s = schur(a)?;
    Ok((0..a.dim()).map(|i| s.t.get(i, i)).collect())
}

/// Eigenvalues plus an eigenvector matrix with unit columns.
///
/// Column k of the returned matrix is a unit eigenvector for eigenvalue k,
/// built by back-substitution on the triangular Schur factor. For defective
/// matrices the columns still exist but become numerically dependent; the
/// caller diagnoses that through the condition of the returned matrix.
pub fn eigen_pairs(a: &ComplexMatrix) -> Result<(Vec<Complex64>, ComplexMatrix), LinalgError> {
    let n = a.dim();
    let s = schur(a)?;
    let tnorm = s.t.frobenius_norm().max(1e-300);
    let tiny = f64::EPSILON * tnorm;
    let mut v = ComplexMatrix::zeros(n);
    let mut y = vec![ZERO; n];
    for k in 0..n {
        let lam = s.t.get(k, k);
        for item in y.iter_mut() {
            *item = ZERO;
        }
        y[k] = Complex64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let mut num = ZERO;
            for j in i + 1..=k {
                num += s.t.get(i, j) * y[j];
            }
            let mut den = s.t.get(i, i) - lam;
            if den.norm() < tiny {
                den = Complex64::new(tiny, 0.0);
            }
            y[i] = -num / den;
            let mag = y[i].norm();
            if mag > 1e120 {
                for item in y.iter_mut().take(k + 1) {
                    *item /= mag;
                }
            }
        }
        // Back to the original basis and normalize.
        let mut norm_sq = 0.0;
        let mut col = vec![ZERO; n];
        for (r, c) in col.iter_mut().enumerate() {
            let mut acc = ZERO;
            for j in 0..=k {
                acc += s.q.get(r, j) * y[j];
            }
            *c = acc;
            norm_sq += acc.norm_sqr();
        }
        let norm = norm_sq.sqrt();
        for (r, c) in col.iter().enumerate() {
            v.set(r, k, c / norm);
        }
    }
    Ok(((0..n).map(|i| s.t.get(i, i)).collect(), v))
}
