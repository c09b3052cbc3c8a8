//! Hermitian eigensolver: Householder tridiagonalization followed by the
//! implicit-shift QL sweep (EISPACK tql2 lineage), plus a vector-free QL
//! entry point for plain real symmetric tridiagonal matrices.

use num_complex::Complex64;

use super::{ComplexMatrix, LinalgError};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Reduces a Hermitian matrix to real symmetric tridiagonal form by unitary
/// similarity: `Q* A Q = tridiag(d, e)`. Complex subdiagonal phases produced
/// by the Householder sweep are absorbed into `Q` afterwards so that `e` is
/// real and nonnegative.
fn tridiagonalize(a: &ComplexMatrix) -> (Vec<f64>, Vec<f64>, ComplexMatrix) {
    let n = a.dim();
    let mut w = a.clone();
    let mut q = ComplexMatrix::identity(n);
    let mut v = vec![ZERO; n];
    let mut p = vec![ZERO; n];

    for k in 0..n.saturating_sub(2) {
        let mut norm_sq = 0.0;
        for i in k + 1..n {
            norm_sq += w.get(i, k).norm_sqr();
        }
        let norm = norm_sq.sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = w.get(k + 1, k);
        let phase = if x0.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * norm;
        // v = x - alpha e1 on the trailing block; tau = 2 / v*v
        let mut vv = 0.0;
        for i in k + 1..n {
            let vi = if i == k + 1 { w.get(i, k) - alpha } else { w.get(i, k) };
            v[i] = vi;
            vv += vi.norm_sqr();
        }
        if vv == 0.0 {
            continue;
        }
        let tau = 2.0 / vv;

        // Rank-2 Hermitian update: A <- A - v w* - w v* with
        // p = tau A v, w = p - (tau/2)(v* p) v.
        for i in k + 1..n {
            let mut s = ZERO;
            for j in k + 1..n {
                s += w.get(i, j) * v[j];
            }
            p[i] = s * tau;
        }
        let mut vp = ZERO;
        for i in k + 1..n {
            vp += v[i].conj() * p[i];
        }
        let mu = vp * (tau / 2.0);
        for i in k + 1..n {
            p[i] -= mu * v[i];
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let upd = v[i] * p[j].conj() + p[i] * v[j].conj();
                let cur = w.get(i, j);
                w.set(i, j, cur - upd);
            }
        }
        w.set(k + 1, k, alpha);
        w.set(k, k + 1, alpha.conj());
        for i in k + 2..n {
            w.set(i, k, ZERO);
            w.set(k, i, ZERO);
        }

        // Q <- Q (I - tau v v*)
        for r in 0..n {
            let mut s = ZERO;
            for i in k + 1..n {
                s += q.get(r, i) * v[i];
            }
            let s = s * tau;
            for i in k + 1..n {
                let cur = q.get(r, i);
                q.set(r, i, cur - s * v[i].conj());
            }
        }
    }

    // Absorb subdiagonal phases into Q so the tridiagonal is real.
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    let mut scale = Complex64::new(1.0, 0.0);
    for i in 0..n {
        if i > 0 {
            // s_i = phase(t_{i,i-1} s_{i-1}) keeps |s_i| = 1 and turns the
            // scaled subdiagonal real nonnegative.
            let t = w.get(i, i - 1) * scale;
            let mag = t.norm();
            if mag > 0.0 {
                scale = t / mag;
            }
            e[i - 1] = mag;
        }
        d[i] = w.get(i, i).re;
        if scale != Complex64::new(1.0, 0.0) {
            for r in 0..n {
                let cur = q.get(r, i);
                q.set(r, i, cur * scale);
            }
        }
    }
    (d, e, q)
}

/// Implicit-shift QL on a real symmetric tridiagonal, rotations optionally
/// accumulated into the complex column basis `q`.
fn tql(d: &mut [f64], e: &mut [f64], mut q: Option<&mut ComplexMatrix>) -> Result<(), LinalgError> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    let mut work_e = vec![0.0; n];
    work_e[..n - 1].copy_from_slice(&e[..n - 1]);

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if work_e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 50 {
                return Err(LinalgError::ConvergenceFailure {
                    what: "tridiagonal QL sweep",
                    iterations: iter,
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * work_e[l]);
            let mut r = g.hypot(1.0);
            let denom = g + if g >= 0.0 { r.abs() } else { -r.abs() };
            g = d[m] - d[l] + work_e[l] / denom;
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut underflow = false;
            for i in (l..m).rev() {
                let mut f = s * work_e[i];
                let b = c * work_e[i];
                r = f.hypot(g);
                work_e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    work_e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(qm) = q.as_deref_mut() {
                    let nq = qm.dim();
                    for row in 0..nq {
                        f = qm.get(row, i + 1).re;
                        let fi = qm.get(row, i + 1).im;
                        let gr = qm.get(row, i);
                        qm.set(
                            row,
                            i + 1,
                            Complex64::new(s * gr.re + c * f, s * gr.im + c * fi),
                        );
                        qm.set(
                            row,
                            i,
                            Complex64::new(c * gr.re - s * f, c * gr.im - s * fi),
                        );
                    }
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            work_e[l] = g;
            work_e[m] = 0.0;
        }
    }

    // Ascending eigenvalue order, columns permuted along.
    for i in 0..n {
        let mut k = i;
        for j in i + 1..n {
            if d[j] < d[k] {
                k = j;
            }
        }
        if k != i {
            d.swap(i, k);
            if let Some(qm) = q.as_deref_mut() {
                let nq = qm.dim();
                for row in 0..nq {
                    let a = qm.get(row, i);
                    let b = qm.get(row, k);
                    qm.set(row, i, b);
                    qm.set(row, k, a);
                }
            }
        }
    }
    Ok(())
}

/// Full eigendecomposition of a Hermitian matrix: ascending real eigenvalues
/// and a unitary `Q` with `A = Q diag(vals) Q*`.
pub fn hermitian_eigen(a: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix), LinalgError> {
    let n = a.dim();
    if n == 1 {
        return Ok((vec![a.get(0, 0).re], ComplexMatrix::identity(1)));
    }
    let (mut d, mut e, mut q) = tridiagonalize(a);
    tql(&mut d, &mut e, Some(&mut q))?;
    Ok((d, q))
}

/// Ascending eigenvalues of a real symmetric tridiagonal matrix given its
/// diagonal and subdiagonal; no vectors are formed, so large truncations are
/// cheap.
pub fn symtri_eigenvalues(diag: &[f64], offdiag: &[f64]) -> Result<Vec<f64>, LinalgError> {
    assert_eq!(
        offdiag.len() + 1,
        diag.len(),
        "subdiagonal must be one shorter than the diagonal"
    );
    let mut d = diag.to_vec();
    let mut e = offdiag.to_vec();
    e.push(0.0);
    tql(&mut d, &mut e, None)?;
    Ok(d)
}
