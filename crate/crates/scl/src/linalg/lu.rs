//! LU factorization with partial pivoting for dense complex matrices.
//!
//! One factorization serves four solve paths: `A x = b`, `A* x = b`, matrix
//! right-hand sides, and explicit inversion. The adjoint path is what lets a
//! single factorization drive inverse-power iterations on `A* A`.

use num_complex::Complex64;

use super::ComplexMatrix;

/// Packed LU factors of a square matrix, `P A = L U`.
///
/// `L` is unit lower triangular, `U` upper triangular, both stored in one
/// row-major block. `piv[k]` records the row swapped into position `k` during
/// elimination step `k`.
pub struct Lu {
    n: usize,
    lu: Vec<Complex64>,
    piv: Vec<usize>,
    min_pivot: f64,
}

impl Lu {
    /// Factors `m` with row partial pivoting. Never fails; exact singularity
    /// shows up as `min_pivot() == 0` and zero pivots are kept as zeros so
    /// that solves against them produce infinities the callers can detect.
    pub fn factor(m: &ComplexMatrix) -> Lu {
        let n = m.dim();
        let mut lu = m.entries().to_vec();
        let mut piv = vec![0usize; n];
        let mut min_pivot = f64::INFINITY;
        for k in 0..n {
            let mut best = k;
            let mut best_abs = lu[k * n + k].norm();
            for i in k + 1..n {
                let a = lu[i * n + k].norm();
                if a > best_abs {
                    best_abs = a;
                    best = i;
                }
            }
            piv[k] = best;
            if best != k {
                for j in 0..n {
                    lu.swap(k * n + j, best * n + j);
                }
            }
            let pivot = lu[k * n + k];
            min_pivot = min_pivot.min(pivot.norm());
            if pivot.norm() == 0.0 {
                continue;
            }
            for i in k + 1..n {
                let f = lu[i * n + k] / pivot;
                lu[i * n + k] = f;
                for j in k + 1..n {
                    let u = lu[k * n + j];
                    lu[i * n + j] -= f * u;
                }
            }
        }
        if n == 0 {
            min_pivot = 0.0;
        }
        Lu { n, lu, piv, min_pivot }
    }

    /// Smallest pivot magnitude encountered; zero means exactly singular.
    pub fn min_pivot(&self) -> f64 {
        self.min_pivot
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [Complex64]) {
        let n = self.n;
        assert_eq!(b.len(), n);
        for k in 0..n {
            b.swap(k, self.piv[k]);
        }
        for i in 1..n {
            let mut s = b[i];
            for j in 0..i {
                s -= self.lu[i * n + j] * b[j];
            }
            b[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for j in i + 1..n {
                s -= self.lu[i * n + j] * b[j];
            }
            b[i] = s / self.lu[i * n + i];
        }
    }

    /// Solves `A* x = b` in place using the factors of `A`.
    ///
    /// With `P A = L U` the adjoint is `A* = U* L* P`, so the sweep order is
    /// a forward solve with `U*`, a backward solve with the unit-diagonal
    /// `L*`, and finally the pivot swaps undone in reverse.
    pub fn solve_adjoint_in_place(&self, b: &mut [Complex64]) {
        let n = self.n;
        assert_eq!(b.len(), n);
        for i in 0..n {
            let mut s = b[i];
            for j in 0..i {
                s -= self.lu[j * n + i].conj() * b[j];
            }
            b[i] = s / self.lu[i * n + i].conj();
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for j in i + 1..n {
                s -= self.lu[j * n + i].conj() * b[j];
            }
            b[i] = s;
        }
        for k in (0..n).rev() {
            b.swap(k, self.piv[k]);
        }
    }

    /// Solves `A X = B` column by column.
    pub fn solve_matrix(&self, b: &ComplexMatrix) -> ComplexMatrix {
        let n = self.n;
        assert_eq!(b.dim(), n);
        let mut out = ComplexMatrix::zeros(n);
        let mut col = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..n {
            for i in 0..n {
                col[i] = b.get(i, j);
            }
            self.solve_in_place(&mut col);
            for i in 0..n {
                out.set(i, j, col[i]);
            }
        }
        out
    }

    /// Explicit inverse, `A^{-1}`.
    pub fn inverse(&self) -> ComplexMatrix {
        self.solve_matrix(&ComplexMatrix::identity(self.n))
    }
}
