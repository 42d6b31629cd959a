//! Lagrange vs mixed comparison over a sequence of uniform refinements.

use std::sync::Arc;

use crate::elements::ElementFamily;
use crate::error::{FemError, Result};
use crate::linalg::SolverOptions;
use crate::mesh::{CellKind, Mesh};
use crate::problems::{
    l2_error, l2_norm, project_discontinuous, recover_velocity, solve_darcy_mixed, solve_poisson_lagrange, u_error,
    CellFn, ExactSolution,
};
use crate::quadrature::quad_order_for;
use crate::spaces::{Field, ScalarFn, Space, VectorFn};

/// One table row. `*_comp` columns compare the two methods, `*_err`
/// columns compare the Lagrange (`P_err`, `U_err`) or mixed (`Pmx_err`,
/// `Umx_err`) solution with the exact solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonRow {
    pub h: f64,
    pub p_comp: f64,
    pub p_err: f64,
    pub pmx_err: f64,
    pub u_comp: f64,
    pub u_err: f64,
    pub umx_err: f64,
}

impl ComparisonRow {
    pub const HEADER: [&'static str; 7] = ["h", "P_comp", "P_err", "Pmx_err", "U_comp", "U_err", "Umx_err"];

    pub fn values(&self) -> [f64; 7] {
        [self.h, self.p_comp, self.p_err, self.pmx_err, self.u_comp, self.u_err, self.umx_err]
    }

    /// Same row with the velocity error columns divided by `u_norm`.
    pub fn normalized(&self, u_norm: f64) -> Self {
        Self { u_err: self.u_err / u_norm, umx_err: self.umx_err / u_norm, ..*self }
    }
}

/// Pressure and velocity components of one method; `u` is the raw vector
/// field when the method has one.
#[derive(Debug, Clone)]
pub struct MethodResult {
    pub p: Field,
    pub ux: Field,
    pub uy: Field,
    pub u: Option<Field>,
}

/// Computes every column for one refinement level with a rule of `degree`.
pub fn comparison_row(
    h: f64,
    lagrange: &MethodResult,
    mixed: &MethodResult,
    exact: &ExactSolution,
    degree: usize,
) -> Result<ComparisonRow> {
    let (p_ex, u_ex) = exact_pair(exact)?;
    let mesh = lagrange.p.space().mesh().clone();
    let pe = ScalarFn(|x| p_ex(x));
    let ux_ex = ScalarFn(|x| u_ex(x)[0]);
    let uy_ex = ScalarFn(|x| u_ex(x)[1]);
    let l2 = |a: &Field, b: &dyn crate::spaces::CellFunction| l2_error(a, b, &mesh, degree);
    let umx_err = match &mixed.u {
        Some(u) => l2_error(u, &VectorFn(|x| u_ex(x)), &mesh, degree)?,
        None => u_error(l2(&mixed.ux, &ux_ex)?, l2(&mixed.uy, &uy_ex)?, 1.0),
    };
    Ok(ComparisonRow {
        h,
        p_comp: l2(&mixed.p, &lagrange.p)?,
        p_err: l2(&lagrange.p, &pe)?,
        pmx_err: l2(&mixed.p, &pe)?,
        u_comp: u_error(l2(&mixed.ux, &lagrange.ux)?, l2(&mixed.uy, &lagrange.uy)?, 1.0),
        u_err: u_error(l2(&lagrange.ux, &ux_ex)?, l2(&lagrange.uy, &uy_ex)?, 1.0),
        umx_err,
    })
}

fn exact_pair(exact: &ExactSolution) -> Result<(&crate::problems::ScalarFunction, &crate::problems::VectorFunction)> {
    match (&exact.p, &exact.u) {
        (Some(p), Some(u)) => Ok((p, u)),
        _ => Err(FemError::InvalidArgument(format!("exact solution '{}' needs both p and u", exact.name))),
    }
}

/// Solves `-lap p = 1`, `p = 0` on the boundary with Lagrange order `k` and
/// with the mixed method of order `k - 1` (`f = 0`, `g = -1`, `p0 = 0`) on
/// `mesh` and `r` uniform refinements of it.
pub fn compare_methods(
    mesh: Arc<Mesh>,
    k: usize,
    r: usize,
    exact: &ExactSolution,
    opts: &SolverOptions,
) -> Result<Vec<ComparisonRow>> {
    if mesh.kind() != CellKind::Triangle {
        return Err(FemError::InvalidArgument("the comparison needs a triangle mesh".into()));
    }
    if k == 0 {
        return Err(FemError::UnsupportedOrder { what: "comparison (Lagrange order)", order: k });
    }
    exact_pair(exact)?;
    let degree = quad_order_for(k);
    let mut rows = Vec::with_capacity(r + 1);
    let mut current = mesh;
    for level in 0..=r {
        if level > 0 {
            current = Arc::new(current.uniform_refine());
        }
        let lag = solve_poisson_lagrange(current.clone(), k, &|_| 1.0, &|_| 0.0, opts)?;
        lag.report.clone().into_result()?;
        let (ux, uy) = recover_velocity(&lag.p)?;
        let lagrange = MethodResult { p: lag.p, ux, uy, u: None };

        let mx = solve_darcy_mixed(current.clone(), k - 1, &|_| [0.0, 0.0], &|_| -1.0, &|_| 0.0, opts)?;
        mx.report.clone().into_result()?;
        let dg = Space::new(current.clone(), ElementFamily::discontinuous(CellKind::Triangle, k - 1), 1)?;
        let u = &mx.u;
        let vec_fn = CellFn(2, |_: &Mesh, c, xi, out: &mut [f64]| {
            let v = u.vector(c, xi).expect("cell geometry validated when the mesh was built");
            out[..2].copy_from_slice(&v);
        });
        let mut parts = project_discontinuous(&dg, &vec_fn)?.into_iter();
        let (mux, muy) = (parts.next().expect("two components"), parts.next().expect("two components"));
        let mixed = MethodResult { p: mx.p, ux: mux, uy: muy, u: Some(mx.u) };
        rows.push(comparison_row(current.h(), &lagrange, &mixed, exact, degree)?);
    }
    Ok(rows)
}

/// `|u_ex|` on `mesh`, for [`ComparisonRow::normalized`].
pub fn exact_velocity_norm(exact: &ExactSolution, mesh: &Mesh, degree: usize) -> Result<f64> {
    let (_, u) = exact_pair(exact)?;
    l2_norm(&VectorFn(|x| u(x)), mesh, degree)
}
