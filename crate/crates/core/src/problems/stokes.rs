//! Steady Stokes with Taylor-Hood elements.

use std::sync::Arc;

use crate::assembly::{stokes_blocks, BlockSystem, StokesBlocks};
use crate::error::Result;
use crate::linalg::{minres, norm, SolveReport, SolverOptions};
use crate::mesh::Mesh;
use crate::spaces::Field;

/// Velocity (vector Lagrange order `k`) and pressure (order `k - 1`, pinned
/// to zero at DOF 0).
#[derive(Debug, Clone)]
pub struct FlowSolution {
    pub u: Field,
    pub p: Field,
    pub report: SolveReport,
    /// `|D u|` over all pressure test functions, including the pinned one.
    pub divergence_residual: f64,
}

impl FlowSolution {
    pub(crate) fn from_solution(blocks: &StokesBlocks, sys: &BlockSystem, x: &[f64], report: SolveReport) -> Result<Self> {
        let (u, p) = sys.split(x);
        let divergence_residual = norm(&blocks.divergence.spmv(u)?);
        Ok(Self {
            u: Field::from_coeffs(blocks.u_space.clone(), u.to_vec())?,
            p: Field::from_coeffs(blocks.p_space.clone(), p.to_vec())?,
            report,
            divergence_residual,
        })
    }
}

/// Solves `-nu lap u + grad p = f`, `div u = 0`, `u = g_d` on the boundary
/// with MINRES (block-diagonal preconditioner when `opts.precondition`).
pub fn solve_stokes_steady(
    mesh: Arc<Mesh>,
    k: usize,
    nu: f64,
    f_vec: &dyn Fn([f64; 2]) -> [f64; 2],
    g_d: &dyn Fn([f64; 2]) -> [f64; 2],
    opts: &SolverOptions,
) -> Result<FlowSolution> {
    let blocks = stokes_blocks(mesh, k, nu, f_vec, g_d)?;
    let sys = blocks.system(blocks.viscous.clone())?;
    let m = opts.precondition.then(|| sys.diagonal_preconditioner());
    let (x, report) = minres(&sys, &sys.rhs(), None, m.as_deref(), opts)?;
    FlowSolution::from_solution(&blocks, &sys, &x, report)
}
