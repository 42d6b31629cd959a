//! Steady Navier-Stokes by Picard iteration: each step solves the Stokes
//! system with the convection term linearized about the previous velocity.

use std::sync::Arc;

use crate::assembly::{assemble_bilinear, assemble_convection, stokes_blocks, BilinearKind};
use crate::error::{FemError, Result};
use crate::linalg::{gmres_with, LinearOperator, SolveReport, SolverOptions};
use crate::mesh::Mesh;
use crate::problems::mass_norm;
use crate::problems::stokes::FlowSolution;
use crate::spaces::Field;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardOptions {
    /// Stop once the velocity increment in the mass norm is at most `tol`.
    pub tol: f64,
    pub maxit: usize,
    /// Under-relaxation factor in `(0, 1]`; 1 means none.
    pub relaxation: f64,
}

impl Default for PicardOptions {
    fn default() -> Self {
        Self { tol: 1e-8, maxit: 50, relaxation: 1.0 }
    }
}

#[derive(Debug, Clone)]
pub struct NavierSolution {
    pub u: Field,
    pub p: Field,
    pub iterations: usize,
    pub converged: bool,
    /// Velocity increment after each iteration.
    pub increments: Vec<f64>,
    /// Inner solve of the last iteration.
    pub last_report: SolveReport,
    pub divergence_residual: f64,
}

/// Runs the Picard loop from `initial` (velocity and pressure coefficient
/// vectors) or from zero. Each step solves for the correction `S d = b - S x`
/// with block-triangular preconditioned GMRES, reducing that residual by
/// `opts.rtol` (or down to `opts.atol`).
///
/// An inner solve that fails is an error; running out of outer iterations
/// returns the last iterate with `converged = false`.
#[allow(clippy::too_many_arguments)]
pub fn solve_navier_steady_picard(
    mesh: Arc<Mesh>,
    k: usize,
    nu: f64,
    f_vec: &dyn Fn([f64; 2]) -> [f64; 2],
    g_d: &dyn Fn([f64; 2]) -> [f64; 2],
    picard: &PicardOptions,
    opts: &SolverOptions,
    initial: Option<(&[f64], &[f64])>,
) -> Result<NavierSolution> {
    if !(picard.tol > 0.0) {
        return Err(FemError::InvalidArgument(format!("Picard tolerance must be positive, got {}", picard.tol)));
    }
    if !(picard.relaxation > 0.0 && picard.relaxation <= 1.0) {
        return Err(FemError::InvalidArgument(format!("relaxation must lie in (0, 1], got {}", picard.relaxation)));
    }
    let blocks = stokes_blocks(mesh, k, nu, f_vec, g_d)?;
    let mass = assemble_bilinear(BilinearKind::Mass, &blocks.u_space, &blocks.u_space, 1.0)?;
    let (n_u, n_p) = (blocks.u_space.ndofs(), blocks.p_space.ndofs());
    let mut x = vec![0.0; n_u + n_p];
    if let Some((u0, p0)) = initial {
        if u0.len() != n_u {
            return Err(FemError::DimensionMismatch { expected: n_u, got: u0.len() });
        }
        if p0.len() != n_p {
            return Err(FemError::DimensionMismatch { expected: n_p, got: p0.len() });
        }
        x[..n_u].copy_from_slice(u0);
        x[n_u..].copy_from_slice(p0);
    }
    let mut increments = Vec::new();
    let mut last: Option<(Vec<f64>, SolveReport)> = None;
    let mut converged = false;
    let mut sys = None;
    for _ in 0..picard.maxit.max(1) {
        let u_m = Field::from_coeffs(blocks.u_space.clone(), x[..n_u].to_vec())?;
        let a = blocks.viscous.add(1.0, &assemble_convection(&u_m)?, 1.0)?;
        let s = blocks.system(a)?;
        let m = blocks.preconditioner(&s)?;
        let mut r = s.rhs();
        let mut sx = vec![0.0; r.len()];
        s.apply(&x, &mut sx);
        r.iter_mut().zip(&sx).for_each(|(r, v)| *r -= v);
        let (d, report) = gmres_with(&s, &r, None, &m, opts)?;
        let report = report.into_result()?;
        let mut y: Vec<f64> = x.iter().zip(&d).map(|(x, d)| x + d).collect();
        if picard.relaxation < 1.0 {
            let w = picard.relaxation;
            y.iter_mut().zip(&x).for_each(|(y, x)| *y = w * *y + (1.0 - w) * x);
        }
        let diff: Vec<f64> = y[..n_u].iter().zip(&x[..n_u]).map(|(a, b)| a - b).collect();
        let inc = mass_norm(&mass, &diff)?;
        increments.push(inc);
        x = y;
        last = Some((x.clone(), report));
        sys = Some(s);
        if inc <= picard.tol {
            converged = true;
            break;
        }
    }
    let (x, report) = last.expect("at least one Picard iteration runs");
    let sys = sys.expect("at least one Picard iteration runs");
    let flow = FlowSolution::from_solution(&blocks, &sys, &x, report)?;
    Ok(NavierSolution {
        u: flow.u,
        p: flow.p,
        iterations: increments.len(),
        converged,
        increments,
        last_report: flow.report,
        divergence_residual: flow.divergence_residual,
    })
}
