//! Sparse matrices and Krylov solvers.

mod ilu;
mod krylov;
mod sparse;

pub use ilu::Ilu0;
pub use krylov::{cg, gmres, gmres_with, minres};
pub use sparse::{SparseMatrix, TripletBuilder};

use crate::io::format::general;

/// Square operator `y = S x`.
pub trait LinearOperator {
    fn size(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

/// Stopping parameters shared by every solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub rtol: f64,
    pub atol: f64,
    pub maxiter: usize,
    /// Ask problem drivers for diagonal preconditioning (Jacobi for CG,
    /// block diagonal for saddle systems). Off by default.
    pub precondition: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { rtol: 1e-6, atol: 1e-10, maxiter: 10000, precondition: false }
    }
}

impl SolverOptions {
    /// Absolute residual target `max(rtol * |b|, atol)`.
    pub fn target(&self, bnorm: f64) -> f64 {
        (self.rtol * bnorm).max(self.atol)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub solver: &'static str,
    pub converged: bool,
    pub iterations: usize,
    /// True residual `|b - A x|` of the returned iterate.
    pub final_residual_norm: f64,
    /// Residual estimate after each iteration.
    pub residual_history: Vec<f64>,
}

impl SolveReport {
    /// One-line solver summary for console logs.
    pub fn message(&self) -> String {
        if self.converged {
            format!(
                "{} converged in {} iterations with a residual norm of {}.",
                self.solver,
                self.iterations,
                general(self.final_residual_norm)
            )
        } else {
            format!(
                "{} did not converge in {} iterations. Residual norm is {}.",
                self.solver,
                self.iterations,
                general(self.final_residual_norm)
            )
        }
    }

    pub fn into_result(self) -> crate::error::Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(crate::error::FemError::NotConverged {
                solver: self.solver,
                iterations: self.iterations,
                residual: self.final_residual_norm,
            })
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += alpha x`
pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(y, x)| *y += alpha * x);
}
