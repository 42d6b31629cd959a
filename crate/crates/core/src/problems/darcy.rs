//! Mixed Darcy problem `u + grad p = f`, `div u = -g`, `p = p0` on the
//! boundary, with RT_k x DiscontinuousP_k.

use std::sync::Arc;

use crate::assembly::build_darcy_system;
use crate::error::Result;
use crate::linalg::{minres, SolveReport, SolverOptions};
use crate::mesh::Mesh;
use crate::spaces::Field;

#[derive(Debug, Clone)]
pub struct MixedSolution {
    pub u: Field,
    pub p: Field,
    pub report: SolveReport,
}

/// Solves the saddle system with MINRES (block-diagonal preconditioner when
/// `opts.precondition`).
pub fn solve_darcy_mixed(
    mesh: Arc<Mesh>,
    k: usize,
    f_vec: &dyn Fn([f64; 2]) -> [f64; 2],
    g: &dyn Fn([f64; 2]) -> f64,
    p0: &dyn Fn([f64; 2]) -> f64,
    opts: &SolverOptions,
) -> Result<MixedSolution> {
    let problem = build_darcy_system(mesh, k, f_vec, g, p0)?;
    let sys = &problem.system;
    let m = opts.precondition.then(|| sys.diagonal_preconditioner());
    let (x, report) = minres(sys, &sys.rhs(), None, m.as_deref(), opts)?;
    let (u, p) = sys.split(&x);
    Ok(MixedSolution {
        u: Field::from_coeffs(problem.u_space, u.to_vec())?,
        p: Field::from_coeffs(problem.p_space, p.to_vec())?,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elements::ElementFamily;
    use crate::mesh::CellKind;
    use crate::problems::{l2_error, project_discontinuous, ExactSolution};
    use crate::spaces::{ScalarFn, Space, VectorFn};

    fn tight() -> SolverOptions {
        SolverOptions { rtol: 1e-12, atol: 1e-14, ..Default::default() }
    }

    fn square(levels: usize) -> Arc<Mesh> {
        Arc::new(Mesh::unit_square_triangles().refined(levels))
    }

    #[test]
    fn homogeneous_gives_zero() {
        let s = solve_darcy_mixed(square(1), 0, &|_| [0.0, 0.0], &|_| 0.0, &|_| 0.0, &tight()).unwrap();
        assert!(s.u.coeffs().iter().chain(s.p.coeffs()).all(|&v| v == 0.0));
    }

    #[test]
    fn divergence_matches_projected_load() {
        let m = square(2);
        // linear g, so the assembled load is the exact projection
        let g = |x: [f64; 2]| 1.0 + 2.0 * x[0] - x[1];
        for k in 0..=1 {
            let s = solve_darcy_mixed(m.clone(), k, &|_| [0.0, 0.0], &g, &|_| 0.0, &tight()).unwrap();
            assert!(s.report.converged);
            let dg = Space::new(m.clone(), ElementFamily::discontinuous(CellKind::Triangle, k), 1).unwrap();
            let proj = project_discontinuous(&dg, &ScalarFn(|x| -g(x))).unwrap().remove(0);
            for c in 0..m.num_cells() {
                for xi in [[0.2, 0.2], [0.6, 0.1], [0.1, 0.7]] {
                    let d = s.u.divergence(c, xi).unwrap();
                    assert!((d - proj.value(c, xi)).abs() < 1e-8, "k={k} cell {c}");
                }
            }
        }
    }

    #[test]
    fn boundary_pressure_converges() {
        // harmonic p with nonzero boundary values
        let ex = ExactSolution::harmonic();
        let (p, u) = (ex.p.clone().unwrap(), ex.u.clone().unwrap());
        let mut prev = f64::INFINITY;
        for level in 1..=3 {
            let m = square(level);
            let s = solve_darcy_mixed(m.clone(), 1, &|_| [0.0, 0.0], &|_| 0.0, &|x| p(x), &tight()).unwrap();
            let ep = l2_error(&s.p, &ScalarFn(|x| p(x)), &m, 6).unwrap();
            let eu = l2_error(&s.u, &VectorFn(|x| u(x)), &m, 6).unwrap();
            assert!(ep < 0.05 && eu < prev / 3.0, "level {level}: {ep} {eu}");
            prev = eu;
        }
    }

    #[test]
    fn preconditioned_matches_plain() {
        let m = square(2);
        let a = solve_darcy_mixed(m.clone(), 1, &|_| [0.0, 0.0], &|_| -1.0, &|_| 0.0, &tight()).unwrap();
        let opts = SolverOptions { precondition: true, ..tight() };
        let b = solve_darcy_mixed(m, 1, &|_| [0.0, 0.0], &|_| -1.0, &|_| 0.0, &opts).unwrap();
        assert!(b.report.converged);
        for (x, y) in a.p.coeffs().iter().zip(b.p.coeffs()) {
            assert!((x - y).abs() < 1e-8);
        }
    }

    #[test]
    fn rejects_quads() {
        let q = Arc::new(Mesh::rectangle_quads([0.0, 1.0], [0.0, 1.0], 2, 2));
        assert!(solve_darcy_mixed(q, 0, &|_| [0.0, 0.0], &|_| 0.0, &|_| 0.0, &tight()).is_err());
    }
}
