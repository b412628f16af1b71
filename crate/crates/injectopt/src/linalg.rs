//! Small dense and sparse linear-algebra kernels used by the solvers.
//!
//! Nothing here is aware of the network model: `Csr` is a plain compressed
//! sparse row matrix and `Lu` a dense LU factorization with partial
//! pivoting. Both are exact-shape, no-frills building blocks.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("matrix is singular to working precision (pivot {pivot:.3e} at column {col})")]
    Singular { col: usize, pivot: f64 },
}

/// Compressed sparse row matrix over `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Csr {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl Csr {
    /// Builds a CSR matrix from triplets. Entries must be unique; rows and
    /// columns inside each row may arrive in any order.
    pub fn from_triplets(n_rows: usize, n_cols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut row_counts = vec![0usize; n_rows];
        for &(r, _, _) in triplets {
            row_counts[r] += 1;
        }
        let mut row_ptr = vec![0usize; n_rows + 1];
        for r in 0..n_rows {
            row_ptr[r + 1] = row_ptr[r] + row_counts[r];
        }
        let nnz = row_ptr[n_rows];
        let mut cols = vec![0usize; nnz];
        let mut vals = vec![0.0; nnz];
        let mut next = row_ptr.clone();
        for &(r, c, v) in triplets {
            let slot = next[r];
            cols[slot] = c;
            vals[slot] = v;
            next[r] += 1;
        }
        // Sort each row by column for reproducible iteration order.
        for r in 0..n_rows {
            let lo = row_ptr[r];
            let hi = row_ptr[r + 1];
            let mut entries: Vec<(usize, f64)> =
                cols[lo..hi].iter().copied().zip(vals[lo..hi].iter().copied()).collect();
            entries.sort_unstable_by_key(|&(c, _)| c);
            for (k, (c, v)) in entries.into_iter().enumerate() {
                cols[lo + k] = c;
                vals[lo + k] = v;
            }
        }
        Csr { n_rows, n_cols, row_ptr, cols, vals }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Iterates `(col, value)` pairs of one row.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let lo = self.row_ptr[r];
        let hi = self.row_ptr[r + 1];
        self.cols[lo..hi].iter().copied().zip(self.vals[lo..hi].iter().copied())
    }

    pub fn row_sum(&self, r: usize) -> f64 {
        let lo = self.row_ptr[r];
        let hi = self.row_ptr[r + 1];
        self.vals[lo..hi].iter().sum()
    }

    /// `out = self * x`.
    pub fn mul_vec(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n_cols);
        debug_assert_eq!(out.len(), self.n_rows);
        for r in 0..self.n_rows {
            let mut acc = 0.0;
            for (c, v) in self.row(r) {
                acc += v * x[c];
            }
            out[r] = acc;
        }
    }

    /// `out = self^T * x`.
    pub fn mul_vec_transpose(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n_rows);
        debug_assert_eq!(out.len(), self.n_cols);
        out.fill(0.0);
        for r in 0..self.n_rows {
            let xr = x[r];
            if xr == 0.0 {
                continue;
            }
            for (c, v) in self.row(r) {
                out[c] += v * xr;
            }
        }
    }

    /// Dense row-major copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut dense = vec![0.0; self.n_rows * self.n_cols];
        for r in 0..self.n_rows {
            for (c, v) in self.row(r) {
                dense[r * self.n_cols + c] = v;
            }
        }
        dense
    }
}

/// Dense LU factorization with partial pivoting: `P A = L U`.
///
/// Supports solving both `A x = b` and `A^T x = b` from the same factors,
/// which is what the limiting-state and engagement-coefficient solves need.
#[derive(Debug, Clone)]
pub struct Lu {
    n: usize,
    /// Packed L (unit diagonal, below) and U (on and above), row-major.
    lu: Vec<f64>,
    /// `perm[r]` is the original row stored at factored row `r`.
    perm: Vec<usize>,
}

const PIVOT_TOL: f64 = 1e-12;

impl Lu {
    /// Factorizes a dense row-major `n x n` matrix.
    pub fn factorize(a: &[f64], n: usize) -> Result<Self, LinalgError> {
        debug_assert_eq!(a.len(), n * n);
        let mut lu = a.to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut pivot_row = k;
            let mut pivot_abs = lu[k * n + k].abs();
            for r in (k + 1)..n {
                let v = lu[r * n + k].abs();
                if v > pivot_abs {
                    pivot_abs = v;
                    pivot_row = r;
                }
            }
            if pivot_abs < PIVOT_TOL {
                return Err(LinalgError::Singular { col: k, pivot: pivot_abs });
            }
            if pivot_row != k {
                for c in 0..n {
                    lu.swap(k * n + c, pivot_row * n + c);
                }
                perm.swap(k, pivot_row);
            }
            let pivot = lu[k * n + k];
            for r in (k + 1)..n {
                let factor = lu[r * n + k] / pivot;
                lu[r * n + k] = factor;
                if factor != 0.0 {
                    for c in (k + 1)..n {
                        lu[r * n + c] -= factor * lu[k * n + c];
                    }
                }
            }
        }
        Ok(Lu { n, lu, perm })
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        debug_assert_eq!(b.len(), n);
        // y = P b, then forward-substitute L y' = y (unit diagonal).
        let mut x: Vec<f64> = self.perm.iter().map(|&r| b[r]).collect();
        for r in 1..n {
            let mut acc = x[r];
            for c in 0..r {
                acc -= self.lu[r * n + c] * x[c];
            }
            x[r] = acc;
        }
        // Back-substitute U x = y'.
        for r in (0..n).rev() {
            let mut acc = x[r];
            for c in (r + 1)..n {
                acc -= self.lu[r * n + c] * x[c];
            }
            x[r] = acc / self.lu[r * n + r];
        }
        x
    }

    /// Solves `A^T x = b` using `A^T = U^T L^T P`.
    pub fn solve_transpose(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        debug_assert_eq!(b.len(), n);
        // Forward-substitute U^T z = b (U^T is lower triangular).
        let mut z = b.to_vec();
        for r in 0..n {
            let mut acc = z[r];
            for c in 0..r {
                acc -= self.lu[c * n + r] * z[c];
            }
            z[r] = acc / self.lu[r * n + r];
        }
        // Back-substitute L^T w = z (unit diagonal).
        for r in (0..n).rev() {
            let mut acc = z[r];
            for c in (r + 1)..n {
                acc -= self.lu[c * n + r] * z[c];
            }
            z[r] = acc;
        }
        // P x = w.
        let mut x = vec![0.0; n];
        for (r, &orig) in self.perm.iter().enumerate() {
            x[orig] = z[r];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csr_matvec_matches_dense() {
        let m = Csr::from_triplets(3, 3, &[(0, 1, 2.0), (1, 0, -1.0), (2, 2, 0.5), (0, 2, 3.0)]);
        let mut out = vec![0.0; 3];
        m.mul_vec(&[1.0, 2.0, 3.0], &mut out);
        assert_eq!(out, vec![2.0 * 2.0 + 3.0 * 3.0, -1.0, 1.5]);

        let mut tout = vec![0.0; 3];
        m.mul_vec_transpose(&[1.0, 2.0, 3.0], &mut tout);
        assert_eq!(tout, vec![-2.0, 2.0, 3.0 + 1.5]);
    }

    #[test]
    fn lu_solves_both_orientations() {
        let a = vec![4.0, 1.0, 0.0, 2.0, 5.0, 1.0, 0.0, 3.0, 6.0];
        let lu = Lu::factorize(&a, 3).unwrap();

        let x = lu.solve(&[1.0, 2.0, 3.0]);
        let residual: Vec<f64> = (0..3)
            .map(|r| (0..3).map(|c| a[r * 3 + c] * x[c]).sum::<f64>())
            .collect();
        for (got, want) in residual.iter().zip([1.0, 2.0, 3.0]) {
            assert!((got - want).abs() < 1e-12);
        }

        let xt = lu.solve_transpose(&[1.0, 2.0, 3.0]);
        let residual_t: Vec<f64> = (0..3)
            .map(|c| (0..3).map(|r| a[r * 3 + c] * xt[r]).sum::<f64>())
            .collect();
        for (got, want) in residual_t.iter().zip([1.0, 2.0, 3.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn lu_rejects_singular() {
        let a = vec![1.0, 2.0, 2.0, 4.0];
        assert!(Lu::factorize(&a, 2).is_err());
    }
}
