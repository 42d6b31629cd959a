//! Poisson problem `-lap p = f`, `p = g_D` on the boundary, with Lagrange
//! elements.

use std::sync::Arc;

use crate::assembly::{apply_essential_bc, assemble_bilinear, assemble_linear, scalar_dof_values, BilinearKind, LinearForm};
use crate::elements::ElementFamily;
use crate::error::Result;
use crate::linalg::{cg, SolveReport, SolverOptions, SparseMatrix};
use crate::mesh::Mesh;
use crate::spaces::{Field, Space};

#[derive(Debug, Clone)]
pub struct LagrangeSolution {
    pub p: Field,
    pub report: SolveReport,
}

/// Assembled and boundary-eliminated system `(space, A, b)`.
pub fn poisson_system(
    mesh: Arc<Mesh>,
    k: usize,
    f: &dyn Fn([f64; 2]) -> f64,
    g_d: &dyn Fn([f64; 2]) -> f64,
) -> Result<(Arc<Space>, SparseMatrix, Vec<f64>)> {
    let family = ElementFamily::lagrange(mesh.kind(), k);
    family.validate()?;
    let space = Space::new(mesh, family, 1)?;
    let mut a = assemble_bilinear(BilinearKind::Diffusion, &space, &space, 1.0)?;
    let mut b = assemble_linear(LinearForm::DomainLoad(f), &space)?;
    let dofs = space.boundary_dofs()?;
    let values = scalar_dof_values(&space, &dofs, g_d);
    apply_essential_bc(&mut a, &mut b, &dofs, &values)?;
    Ok((space, a, b))
}

/// Solves with CG (Jacobi-preconditioned when `opts.precondition`). A solver
/// that stops early is reported in `report`, not as an error.
pub fn solve_poisson_lagrange(
    mesh: Arc<Mesh>,
    k: usize,
    f: &dyn Fn([f64; 2]) -> f64,
    g_d: &dyn Fn([f64; 2]) -> f64,
    opts: &SolverOptions,
) -> Result<LagrangeSolution> {
    let (space, a, b) = poisson_system(mesh, k, f, g_d)?;
    let inv_diag: Option<Vec<f64>> = opts.precondition.then(|| a.diagonal().iter().map(|d| 1.0 / d).collect());
    let (x, report) = cg(&a, &b, None, inv_diag.as_deref(), opts)?;
    Ok(LagrangeSolution { p: Field::from_coeffs(space, x)?, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{l2_error, ExactSolution};
    use crate::quadrature::quad_order_for;
    use crate::spaces::{interpolate_scalar, ScalarFn};

    fn tight() -> SolverOptions {
        SolverOptions { rtol: 1e-12, atol: 1e-14, ..Default::default() }
    }

    #[test]
    fn homogeneous_gives_zero() {
        let m = Arc::new(Mesh::unit_square_triangles().refined(2));
        let s = solve_poisson_lagrange(m, 2, &|_| 0.0, &|_| 0.0, &tight()).unwrap();
        assert!(s.p.coeffs().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn reproduces_quadratic() {
        // p = x^2 + y, -lap p = -2
        let m = Arc::new(Mesh::unit_square_triangles().refined(1));
        let exact = |x: [f64; 2]| x[0] * x[0] + x[1];
        let s = solve_poisson_lagrange(m.clone(), 2, &|_| -2.0, &exact, &tight()).unwrap();
        assert!(l2_error(&s.p, &ScalarFn(exact), &m, 6).unwrap() < 1e-10);
        let q = Arc::new(Mesh::rectangle_quads([0.0, 1.0], [0.0, 2.0], 2, 3));
        let s = solve_poisson_lagrange(q.clone(), 2, &|_| -2.0, &exact, &tight()).unwrap();
        assert!(l2_error(&s.p, &ScalarFn(exact), &q, 6).unwrap() < 1e-10);
    }

    #[test]
    fn unit_load_is_positive_inside() {
        let m = Arc::new(Mesh::unit_square_triangles().refined(3));
        let s = solve_poisson_lagrange(m, 1, &|_| 1.0, &|_| 0.0, &tight()).unwrap();
        let bdofs = s.p.space().boundary_dofs().unwrap();
        for (i, v) in s.p.coeffs().iter().enumerate() {
            if !bdofs.contains(&i) {
                assert!(*v > 0.0);
            }
        }
    }

    #[test]
    fn within_interpolation_envelope() {
        let ex = ExactSolution::sinsin();
        let (p, f) = (ex.p.clone().unwrap(), ex.source.clone().unwrap());
        for k in 1..=3 {
            let m = Arc::new(Mesh::unit_square_triangles().refined(2));
            let s = solve_poisson_lagrange(m.clone(), k, &*f, &|_| 0.0, &tight()).unwrap();
            let q = quad_order_for(k) + 2;
            let err = l2_error(&s.p, &ScalarFn(|x| p(x)), &m, q).unwrap();
            let interp = interpolate_scalar(s.p.space(), |x| p(x)).unwrap();
            let ierr = l2_error(&interp, &ScalarFn(|x| p(x)), &m, q).unwrap();
            assert!(err <= 10.0 * ierr, "k={k}: {err} vs {ierr}");
        }
    }

    #[test]
    fn rejects_bad_order() {
        let m = Arc::new(Mesh::unit_square_triangles());
        assert!(solve_poisson_lagrange(m.clone(), 0, &|_| 1.0, &|_| 0.0, &tight()).is_err());
        assert!(solve_poisson_lagrange(m, 5, &|_| 1.0, &|_| 0.0, &tight()).is_err());
    }
}
