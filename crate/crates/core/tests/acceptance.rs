//! Acceptance gate: one PASS/FAIL line per criterion, each with its runtime.
//!
//! Runs without the libtest harness so the report is always printed; the
//! process exits non-zero if any criterion fails.

mod common;

use std::sync::Arc;
use std::time::{Duration, Instant};

use common::oracle::{bilinear_error, convection_error};
use common::{affine, edge_point, interior_edges, mapped, perturbed_triangles};
use fem2d::assembly::{assemble_bilinear, build_darcy_system, BilinearKind};
use fem2d::elements::{eval_rt_basis, eval_scalar_basis};
use fem2d::io::csv::format_table;
use fem2d::io::vtk::format_vtk;
use fem2d::linalg::{minres, SparseMatrix};
use fem2d::mesh::{BoundaryEdge, CellKind, Mesh};
use fem2d::problems::{
    bvp1d_exact, compare_methods, l2_error, l2_error_zero_mean, solve_bvp_1d, solve_darcy_mixed,
    solve_navier_steady_picard, solve_poisson_lagrange, solve_stokes_steady, ExactSolution, PicardOptions,
};
use fem2d::quadrature::{gauss_rule, Geometry};
use fem2d::spaces::{interpolate_scalar, Field, ScalarFn, Space, VectorFn};
use fem2d::{ElementFamily, SolverOptions};
use nalgebra::{DMatrix, DVector};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

/// `log2(e_i / e_{i+1})` for errors on successively halved meshes.
fn rates(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

fn within(values: &[f64], target: f64, tol: f64) -> bool {
    !values.is_empty() && values.iter().all(|r| (r - target).abs() <= tol)
}

fn fmt(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|v| format!("{v:.3}")).collect();
    format!("[{}]", parts.join(", "))
}

fn fmt_e(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|v| format!("{v:.3e}")).collect();
    format!("[{}]", parts.join(", "))
}

/// Levels of the 2-triangle unit square used for rate studies. Levels 0 and 1
/// are printed but pre-asymptotic (level 0 has no interior P1 node); the
/// criterion is judged on the three refinement steps from level 2 to 5.
const LEVELS: std::ops::RangeInclusive<usize> = 0..=5;
const FIRST_JUDGED: usize = 2;

fn judged(r: &[f64]) -> &[f64] {
    &r[FIRST_JUDGED..]
}

fn tight() -> SolverOptions {
    SolverOptions { rtol: 1e-10, atol: 1e-14, maxiter: 20000, precondition: true }
}

fn unit_triangle() -> Arc<Mesh> {
    let boundary = [[0, 1], [1, 2], [2, 0]].map(|vertices| BoundaryEdge { attribute: 1, vertices }).to_vec();
    Arc::new(Mesh::new(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], CellKind::Triangle, vec![vec![0, 1, 2]], boundary).unwrap())
}

fn max_diff(a: &[Vec<f64>], b: &[[f64; 3]; 3]) -> f64 {
    (0..3).flat_map(|i| (0..3).map(move |j| (a[i][j] - b[i][j]).abs())).fold(0.0, f64::max)
}

fn crit1() -> Outcome {
    let ns = [16, 32, 64, 128];
    let opts = SolverOptions { rtol: 1e-12, atol: 1e-15, ..Default::default() };
    let mut errors = Vec::new();
    for n in ns {
        let s = solve_bvp_1d(n, f64::exp, &opts).unwrap();
        if !s.report.converged {
            return outcome(false, format!("CG failed at n = {n}: {}", s.report.message()));
        }
        errors.push(s.l2_error(bvp1d_exact));
    }
    let r = rates(&errors);
    outcome(within(&r, 2.0, 0.2), format!("P1 rates {} (target 2.0 +- 0.2), errors {}", fmt(&r), fmt_e(&errors)))
}

fn crit2() -> Outcome {
    let exact = ExactSolution::sinsin();
    let (p, src) = (exact.p.unwrap(), exact.source.unwrap());
    let opts = SolverOptions { rtol: 1e-6, maxiter: 10000, ..Default::default() };
    let mut pass = true;
    let mut detail = Vec::new();
    for k in 1..=3 {
        let mut errors = Vec::new();
        for level in LEVELS {
            let m = Arc::new(Mesh::unit_square_triangles().refined(level));
            let s = solve_poisson_lagrange(m.clone(), k, &|x| src(x), &|x| p(x), &opts).unwrap();
            pass &= s.report.converged && s.report.iterations <= 10000;
            errors.push(l2_error(&s.p, &ScalarFn(|x| p(x)), &m, 2 * k + 4).unwrap());
        }
        let r = rates(&errors);
        pass &= within(judged(&r), (k + 1) as f64, 0.3);
        detail.push(format!("k={k}: {}", fmt(&r)));
    }
    outcome(pass, format!("L2 rates levels 0-5 {} (last 3 judged, target k+1 +- 0.3), CG rtol 1e-6", detail.join(", ")))
}

fn crit3() -> Outcome {
    let exact = ExactSolution::sinsin();
    let (p, u, src) = (exact.p.unwrap(), exact.u.unwrap(), exact.source.unwrap());
    let opts = SolverOptions { rtol: 1e-10, atol: 1e-14, maxiter: 20000, precondition: false };
    let mut pass = true;
    let mut detail = Vec::new();
    for k in 0..=1 {
        let (mut eu, mut ep) = (Vec::new(), Vec::new());
        for level in LEVELS {
            let m = Arc::new(Mesh::unit_square_triangles().refined(level));
            let (f, g, p0) = (|_: [f64; 2]| [0.0, 0.0], |x: [f64; 2]| -src(x), |x: [f64; 2]| p(x));
            let bnorm = build_darcy_system(m.clone(), k, &f, &g, &p0).unwrap().system.rhs().iter().map(|v| v * v).sum::<f64>().sqrt();
            let s = solve_darcy_mixed(m.clone(), k, &f, &g, &p0, &opts).unwrap();
            // converged and the reported true residual meets max(rtol |b|, atol)
            pass &= s.report.converged && s.report.final_residual_norm <= opts.target(bnorm);
            eu.push(l2_error(&s.u, &VectorFn(|x| u(x)), &m, 2 * k + 6).unwrap());
            ep.push(l2_error(&s.p, &ScalarFn(|x| p(x)), &m, 2 * k + 6).unwrap());
        }
        let (ru, rp) = (rates(&eu), rates(&ep));
        let target = (k + 1) as f64;
        pass &= within(judged(&ru), target, 0.3) && within(judged(&rp), target, 0.3);
        detail.push(format!("RT{k}: flux {} pressure {}", fmt(&ru), fmt(&rp)));
    }
    outcome(pass, format!("levels 0-5 {} (last 3 judged, targets 1.0 / 2.0 +- 0.3)", detail.join("; ")))
}

fn crit4() -> Outcome {
    let base = Arc::new(Mesh::unit_square_triangles().refined(1));
    let rows = match compare_methods(base, 1, 4, &ExactSolution::harmonic(), &tight()) {
        Ok(rows) => rows,
        Err(e) => return outcome(false, format!("compare_methods failed: {e}")),
    };
    let pc: Vec<f64> = rows.iter().map(|r| r.p_comp).collect();
    let uc: Vec<f64> = rows.iter().map(|r| r.u_comp).collect();
    let ratios: Vec<f64> = pc.windows(2).map(|w| w[0] / w[1]).collect();
    let p_dec = pc.windows(2).all(|w| w[1] < w[0]);
    let u_dec = uc.windows(2).all(|w| w[1] < w[0]);
    let in_band = ratios.len() == 4 && ratios.iter().all(|r| (1.7..=2.5).contains(r));
    outcome(
        p_dec && u_dec && in_band,
        format!("P_comp ratios {} (band [1.7, 2.5]), U_comp {}", fmt(&ratios), fmt_e(&uc)),
    )
}

fn crit5() -> Outcome {
    let m = unit_triangle();
    let s = Space::new(m, ElementFamily::lagrange(CellKind::Triangle, 1), 1).unwrap();
    let k = assemble_bilinear(BilinearKind::Diffusion, &s, &s, 1.0).unwrap().to_dense();
    let mm = assemble_bilinear(BilinearKind::Mass, &s, &s, 1.0).unwrap().to_dense();
    let k_ref = [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]];
    let m_ref = [[2.0, 1.0, 1.0], [1.0, 2.0, 1.0], [1.0, 1.0, 2.0]].map(|r| r.map(|v| v / 24.0));
    let (dk, dm) = (max_diff(&k, &k_ref), max_diff(&mm, &m_ref));
    outcome(dk <= 1e-12 && dm <= 1e-12, format!("stiffness diff {dk:.1e}, mass diff {dm:.1e} (tol 1e-12)"))
}

fn crit6() -> Outcome {
    let meshes = [
        perturbed_triangles(1),
        mapped(&Mesh::rectangle_quads([0.0, 1.0], [0.0, 1.0], 2, 2), affine),
        mapped(&Mesh::rectangle_quads([0.0, 2.0], [0.0, 1.0], 4, 2), affine),
    ];
    let mut worst = 0.0f64;
    let mut checks = 0;
    let mut record = |e: f64| {
        worst = worst.max(e);
        checks += 1;
    };
    for m in &meshes {
        let kind = m.kind();
        for k in 1..=3 {
            let s = Space::new(m.clone(), ElementFamily::lagrange(kind, k), 1).unwrap();
            record(bilinear_error(BilinearKind::Diffusion, &s, &s));
            record(bilinear_error(BilinearKind::Mass, &s, &s));
            if k >= 2 {
                let u = Space::new(m.clone(), ElementFamily::lagrange(kind, k), 2).unwrap();
                let p = Space::new(m.clone(), ElementFamily::lagrange(kind, k - 1), 1).unwrap();
                record(bilinear_error(BilinearKind::VectorDiffusion, &u, &u));
                record(bilinear_error(BilinearKind::VelocityDivergence, &u, &p));
                record(bilinear_error(BilinearKind::GradPressure, &p, &u));
            }
        }
    }
    for k in 0..=1 {
        let m = &meshes[0];
        let rt = Space::new(m.clone(), ElementFamily::raviart_thomas(k), 1).unwrap();
        let dg = Space::new(m.clone(), ElementFamily::discontinuous(CellKind::Triangle, k), 1).unwrap();
        record(bilinear_error(BilinearKind::VectorFEMass, &rt, &rt));
        record(bilinear_error(BilinearKind::VectorFEDivergence, &rt, &dg));
    }
    outcome(worst <= 1e-12, format!("{checks} matrices on <= 8-cell meshes, worst relative diff {worst:.1e} (tol 1e-12)"))
}

fn crit7() -> Outcome {
    let m = unit_triangle();
    let problem = build_darcy_system(m, 1, &|x| [1.0, x[0]], &|x| 1.0 + x[0], &|x| x[0] * x[1]).unwrap();
    let sys = &problem.system;
    let d = sys.to_dense();
    let n = d.len();
    let b = sys.rhs();
    let direct = DMatrix::from_fn(n, n, |i, j| d[i][j]).lu().solve(&DVector::from_column_slice(&b)).unwrap();
    let opts = SolverOptions { rtol: 1e-14, atol: 1e-16, maxiter: 1000, precondition: false };
    let (x, rep) = minres(sys, &b, None, None, &opts).unwrap();
    let diff = x.iter().zip(direct.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);

    let swap = SparseMatrix::from_dense(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
    let (y, srep) = minres(&swap, &[3.0, -2.0], None, None, &opts).unwrap();
    let swap_ok = srep.converged && (y[0] + 2.0).abs() < 1e-12 && (y[1] - 3.0).abs() < 1e-12;
    outcome(
        rep.converged && diff <= 1e-8 && swap_ok,
        format!("1-cell RT1 Darcy ({n} unknowns) vs dense LU diff {diff:.1e} (tol 1e-8); swap system x = [{:.3}, {:.3}]", y[0], y[1]),
    )
}

fn crit8() -> Outcome {
    let nu = 0.01;
    let exact = ExactSolution::vortex(nu);
    let (u, p, f) = (exact.u.unwrap(), exact.p.unwrap(), exact.force.unwrap());
    let (mut eu, mut ep, mut div) = (Vec::new(), Vec::new(), 0.0f64);
    for n in [4, 8, 16] {
        let m = Arc::new(Mesh::rectangle_quads([0.0, 1.0], [0.0, 1.0], n, n));
        let s = match solve_stokes_steady(m.clone(), 2, nu, &|x| f(x), &|x| u(x), &tight()) {
            Ok(s) if s.report.converged => s,
            Ok(s) => return outcome(false, format!("MINRES failed at n = {n}: {}", s.report.message())),
            Err(e) => return outcome(false, format!("solve failed at n = {n}: {e}")),
        };
        div = div.max(s.divergence_residual);
        eu.push(l2_error(&s.u, &VectorFn(|x| u(x)), &m, 8).unwrap());
        ep.push(l2_error_zero_mean(&s.p, &ScalarFn(|x| p(x)), &m, 8).unwrap());
    }
    let (ru, rp) = (rates(&eu), rates(&ep));
    outcome(
        within(&ru, 3.0, 0.4) && within(&rp, 2.0, 0.4) && div <= 1e-5,
        format!("Q2/Q1 nu={nu}: velocity rates {} pressure rates {} (3.0 / 2.0 +- 0.4), max |Du| {div:.1e}", fmt(&ru), fmt(&rp)),
    )
}

fn crit9() -> Outcome {
    let re = 40.0;
    let u = ExactSolution::kovasznay(re).u.unwrap();
    let picard = PicardOptions { tol: 1e-8, maxit: 50, ..Default::default() };
    let opts = SolverOptions { rtol: 1e-10, atol: 1e-13, maxiter: 5000, precondition: true };
    let (mut errors, mut its) = (Vec::new(), Vec::new());
    let mut converged = true;
    for (nx, ny) in [(3, 4), (6, 8), (12, 16)] {
        let m = Arc::new(Mesh::rectangle_quads([-0.5, 1.0], [-0.5, 1.5], nx, ny));
        let s = match solve_navier_steady_picard(m.clone(), 2, 1.0 / re, &|_| [0.0, 0.0], &|x| u(x), &picard, &opts, None) {
            Ok(s) => s,
            Err(e) => return outcome(false, format!("Picard failed on {nx}x{ny}: {e}")),
        };
        converged &= s.converged && s.iterations <= 50;
        its.push(s.iterations as f64);
        errors.push(l2_error(&s.u, &VectorFn(|x| u(x)), &m, 8).unwrap());
    }
    let reductions: Vec<f64> = errors.windows(2).map(|w| w[0] / w[1]).collect();
    let one_cell = Arc::new(Mesh::rectangle_quads([-0.5, 1.0], [-0.5, 1.5], 1, 1));
    let conv = convection_error(&one_cell, 2);
    outcome(
        converged && reductions.iter().all(|&r| r >= 2.0) && conv <= 1e-12,
        format!(
            "Re=40 Picard iterations {:?}, error reductions {} (>= 2), C(u)u vs N(u) {conv:.1e} (tol 1e-12)",
            its.iter().map(|&v| v as usize).collect::<Vec<_>>(),
            fmt(&reductions)
        ),
    )
}

/// Deterministic sweeps over the same invariants as the property suite.
fn crit10() -> Outcome {
    let mut failures = Vec::new();
    let pts: Vec<[f64; 2]> = (1..8).flat_map(|i| (1..8).map(move |j| [i as f64 / 9.0, j as f64 / 9.0])).collect();
    let h = 1e-6;
    for tri in [true, false] {
        let kind = if tri { CellKind::Triangle } else { CellKind::Quad };
        for k in 1..=4 {
            let fam = ElementFamily::lagrange(kind, k);
            for &x in pts.iter().filter(|x| !tri || x[0] + x[1] < 0.99) {
                let e = eval_scalar_basis(fam, x).unwrap();
                if (e.values.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
                    failures.push(format!("partition of unity {fam:?}"));
                }
                let shifted = |dx: f64, dy: f64| eval_scalar_basis(fam, [x[0] + dx, x[1] + dy]).unwrap().values;
                let (px, mx, py, my) = (shifted(h, 0.0), shifted(-h, 0.0), shifted(0.0, h), shifted(0.0, -h));
                for i in 0..e.values.len() {
                    let fd = [(px[i] - mx[i]) / (2.0 * h), (py[i] - my[i]) / (2.0 * h)];
                    if (fd[0] - e.gradients[i][0]).abs() > 1e-6 || (fd[1] - e.gradients[i][1]).abs() > 1e-6 {
                        failures.push(format!("gradient {fam:?}"));
                    }
                }
            }
        }
    }
    for k in 0..=1 {
        for &x in pts.iter().filter(|x| x[0] + x[1] < 0.99) {
            let e = eval_rt_basis(k, x).unwrap();
            let at = |dx: f64, dy: f64| eval_rt_basis(k, [x[0] + dx, x[1] + dy]).unwrap().vectors;
            let (px, mx, py, my) = (at(h, 0.0), at(-h, 0.0), at(0.0, h), at(0.0, -h));
            for i in 0..e.vectors.len() {
                let fd = (px[i][0] - mx[i][0] + py[i][1] - my[i][1]) / (2.0 * h);
                if (fd - e.divergences[i]).abs() > 1e-6 {
                    failures.push(format!("RT{k} divergence"));
                }
            }
        }
        let m = perturbed_triangles(2);
        let s = Space::new(m.clone(), ElementFamily::raviart_thomas(k), 1).unwrap();
        let field = Field::from_coeffs(s.clone(), (0..s.ndofs()).map(|i| (i as f64 * 0.91).cos()).collect()).unwrap();
        let mut jump = 0.0f64;
        for (e, c0, c1) in interior_edges(&m) {
            let [a, b] = m.edge(e);
            let (pa, pb) = (m.vertices()[a], m.vertices()[b]);
            let n = [pb[1] - pa[1], pa[0] - pb[0]];
            for t in [0.1, 0.5, 0.77] {
                let u0 = field.vector(c0, edge_point(&m, c0, e, t)).unwrap();
                let u1 = field.vector(c1, edge_point(&m, c1, e, t)).unwrap();
                jump = jump.max(((u0[0] - u1[0]) * n[0] + (u0[1] - u1[1]) * n[1]).abs());
            }
        }
        if jump > 1e-12 {
            failures.push(format!("RT{k} normal jump {jump:.1e}"));
        }
    }
    let fact = |n: i32| (1..=n).map(f64::from).product::<f64>();
    for geometry in [Geometry::Edge, Geometry::Triangle, Geometry::Quad] {
        for degree in 0..=20usize {
            let rule = gauss_rule(geometry, degree).unwrap();
            let d = degree as i32;
            for a in 0..=d {
                let bmax = match geometry {
                    Geometry::Edge => 0,
                    Geometry::Triangle => d - a,
                    Geometry::Quad => d,
                };
                for b in 0..=bmax {
                    let approx: f64 = rule.iter().map(|(p, w)| w * p[0].powi(a) * if geometry == Geometry::Edge { 1.0 } else { p[1].powi(b) }).sum();
                    let exact = match geometry {
                        Geometry::Edge => 1.0 / f64::from(a + 1),
                        Geometry::Quad => 1.0 / f64::from((a + 1) * (b + 1)),
                        Geometry::Triangle => fact(a) * fact(b) / fact(a + b + 2),
                    };
                    if (approx - exact).abs() > 1e-12 * exact.max(1e-3) {
                        failures.push(format!("quadrature {geometry:?} degree {degree} x^{a} y^{b}"));
                    }
                }
            }
            if rule.weights.iter().any(|&w| w <= 0.0) {
                failures.push(format!("negative weight {geometry:?} degree {degree}"));
            }
        }
    }
    let rows = compare_methods(Arc::new(Mesh::unit_square_triangles()), 1, 1, &ExactSolution::harmonic(), &tight()).unwrap();
    let text = format_table(&rows);
    let csv_ok = text.lines().count() == 3
        && text.lines().skip(1).all(|l| l.split(',').count() == 7 && l.split(',').all(|c| c.parse::<f64>().is_ok()));
    if !csv_ok {
        failures.push("CSV structure".into());
    }
    let m = Arc::new(Mesh::unit_square_triangles().refined(1));
    let s = Space::new(m.clone(), ElementFamily::lagrange(CellKind::Triangle, 2), 1).unwrap();
    let p = interpolate_scalar(&s, |x| x[0]).unwrap();
    let vtk = format_vtk(&m, &[("p", &p), ("u", &VectorFn(|x: [f64; 2]| [x[1], 0.0]))]).unwrap();
    let expect = [
        format!("POINTS {} double", m.num_vertices()),
        format!("CELL_TYPES {}", m.num_cells()),
        format!("POINT_DATA {}", m.num_vertices()),
        "SCALARS p double 1".to_string(),
        "VECTORS u double".to_string(),
    ];
    if !vtk.starts_with("# vtk DataFile Version 3.0\n") || expect.iter().any(|l| !vtk.lines().any(|v| v == l)) {
        failures.push("VTK structure".into());
    }
    failures.dedup();
    let detail = if failures.is_empty() {
        "partition of unity, gradient and RT divergence FD (1e-6), RT normal jumps (1e-12), quadrature sweep to degree 20, CSV/VTK structure".to_string()
    } else {
        format!("failures: {}", failures.join("; "))
    };
    outcome(failures.is_empty(), detail)
}

fn main() {
    type Criterion = (usize, &'static str, fn() -> Outcome, Duration);
    let criteria: [Criterion; 10] = [
        (1, "1D oracle", crit1, Duration::from_secs(1)),
        (2, "Laplace MMS convergence", crit2, Duration::from_secs(30)),
        (3, "Mixed RT convergence", crit3, Duration::from_secs(60)),
        (4, "Formulation comparison trend", crit4, Duration::from_secs(60)),
        (5, "Local P1 matrices", crit5, Duration::from_secs(1)),
        (6, "Assembly brute-force equivalence", crit6, Duration::from_secs(5)),
        (7, "Saddle solver correctness", crit7, Duration::from_secs(1)),
        (8, "Stokes Taylor-Hood MMS", crit8, Duration::from_secs(120)),
        (9, "Navier-Stokes Picard (Kovasznay)", crit9, Duration::from_secs(300)),
        (10, "Property sweeps", crit10, Duration::from_secs(10)),
    ];
    let mut failed = Vec::new();
    for (id, name, run, limit) in criteria {
        let start = Instant::now();
        let out = run();
        let elapsed = start.elapsed();
        let pass = out.pass && elapsed <= limit;
        let timing = format!("{:.2} s, limit {} s", elapsed.as_secs_f64(), limit.as_secs());
        println!("{} [{id:>2}] {name}: {} ({timing})", if pass { "PASS" } else { "FAIL" }, out.detail);
        if !pass {
            failed.push(id);
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
    println!("all 10 criteria passed");
}
