//! Incomplete LU factorization without fill-in.

use super::{LinearOperator, SparseMatrix};
use crate::error::{FemError, Result};

/// ILU(0): `L U ~ A` restricted to the sparsity pattern of `A`, with unit
/// lower triangle. Both factors share one CSR value array.
#[derive(Debug, Clone)]
pub struct Ilu0 {
    lu: SparseMatrix,
    diag: Vec<usize>,
}

impl Ilu0 {
    /// Fails on a non-square matrix or when a pivot is missing or zero.
    pub fn new(a: &SparseMatrix) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(FemError::DimensionMismatch { expected: n, got: a.ncols() });
        }
        let mut lu = a.clone();
        let rp = lu.row_ptr().to_vec();
        let ci = lu.col_idx().to_vec();
        let mut diag = vec![usize::MAX; n];
        for i in 0..n {
            if let Some(k) = (rp[i]..rp[i + 1]).find(|&k| ci[k] == i) {
                diag[i] = k;
            } else {
                return Err(FemError::InvalidArgument(format!("ILU(0): row {i} has no diagonal entry")));
            }
        }
        let vals = lu.values_mut();
        let mut pos = vec![usize::MAX; n];
        for i in 0..n {
            for k in rp[i]..rp[i + 1] {
                pos[ci[k]] = k;
            }
            for kk in rp[i]..diag[i] {
                let k = ci[kk];
                let pivot = vals[diag[k]];
                if pivot == 0.0 {
                    return Err(FemError::InvalidArgument(format!("ILU(0): zero pivot in row {k}")));
                }
                let lik = vals[kk] / pivot;
                vals[kk] = lik;
                for jj in diag[k] + 1..rp[k + 1] {
                    let p = pos[ci[jj]];
                    if p != usize::MAX {
                        vals[p] -= lik * vals[jj];
                    }
                }
            }
            for k in rp[i]..rp[i + 1] {
                pos[ci[k]] = usize::MAX;
            }
            if vals[diag[i]] == 0.0 {
                return Err(FemError::InvalidArgument(format!("ILU(0): zero pivot in row {i}")));
            }
        }
        Ok(Self { lu, diag })
    }

    /// `x = U^-1 L^-1 b`.
    pub fn solve_into(&self, b: &[f64], x: &mut [f64]) {
        let (rp, ci, v) = (self.lu.row_ptr(), self.lu.col_idx(), self.lu.values());
        let n = self.diag.len();
        for i in 0..n {
            let s: f64 = (rp[i]..self.diag[i]).map(|k| v[k] * x[ci[k]]).sum();
            x[i] = b[i] - s;
        }
        for i in (0..n).rev() {
            let s: f64 = (self.diag[i] + 1..rp[i + 1]).map(|k| v[k] * x[ci[k]]).sum();
            x[i] = (x[i] - s) / v[self.diag[i]];
        }
    }
}

impl LinearOperator for Ilu0 {
    fn size(&self) -> usize {
        self.diag.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.solve_into(x, y)
    }
}
