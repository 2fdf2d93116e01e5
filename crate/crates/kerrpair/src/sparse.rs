//! Minimal sparse operator applications for the matrix-free master-equation
//! right-hand sides. The precomputed jump and Hamiltonian operators have a
//! handful of nonzeros per row, so A·rho and rho·A cost O(nnz · dim) instead
//! of O(dim^3).

use crate::scalar::{C, CMat, Scalar};

/// Square sparse operator stored both row-wise and column-wise.
#[derive(Debug, Clone)]
pub struct SparseOp<T: Scalar> {
    dim: usize,
    rows: Vec<Vec<(usize, C<T>)>>,
    cols: Vec<Vec<(usize, C<T>)>>,
}

impl<T: Scalar> SparseOp<T> {
    pub fn from_dense(m: &CMat<T>) -> Self {
        assert_eq!(m.nrows(), m.ncols());
        let dim = m.nrows();
        let mut rows = vec![Vec::new(); dim];
        let mut cols = vec![Vec::new(); dim];
        for j in 0..dim {
            for i in 0..dim {
                let v = m[(i, j)];
                if v.re != T::zero() || v.im != T::zero() {
                    rows[i].push((j, v));
                    cols[j].push((i, v));
                }
            }
        }
        Self { dim, rows, cols }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// out += alpha * A * rho
    pub fn acc_left(&self, alpha: C<T>, rho: &CMat<T>, out: &mut CMat<T>) {
        let n = self.dim;
        debug_assert_eq!(rho.nrows(), n);
        let rho_s = rho.as_slice();
        let out_s = out.as_mut_slice();
        for j in 0..n {
            let rho_col = &rho_s[j * n..(j + 1) * n];
            let out_col = &mut out_s[j * n..(j + 1) * n];
            for (i, row) in self.rows.iter().enumerate() {
                if row.is_empty() {
                    continue;
                }
                let mut acc = C::new(T::zero(), T::zero());
                for &(k, v) in row {
                    acc += v * rho_col[k];
                }
                out_col[i] += alpha * acc;
            }
        }
    }

    /// out += alpha * rho * A
    pub fn acc_right(&self, alpha: C<T>, rho: &CMat<T>, out: &mut CMat<T>) {
        let n = self.dim;
        debug_assert_eq!(rho.nrows(), n);
        let rho_s = rho.as_slice();
        let out_s = out.as_mut_slice();
        for j in 0..n {
            let out_col = &mut out_s[j * n..(j + 1) * n];
            for &(k, v) in &self.cols[j] {
                let w = alpha * v;
                let rho_col = &rho_s[k * n..(k + 1) * n];
                for i in 0..n {
                    out_col[i] += w * rho_col[i];
                }
            }
        }
    }
}
