//! Cell-loop assembly of bilinear and linear forms, essential boundary
//! conditions, and the saddle-point block systems.
//!
//! Matrices are indexed `[test DOF, trial DOF]`. The quadrature degree is
//! `quad_order_for` of the highest polynomial degree among the two spaces.

mod block;

pub use block::{
    build_darcy_system, build_stokes_system, stokes_blocks, BlockSystem, BlockTriangularPreconditioner, SaddleProblem,
    StokesBlocks,
};

use std::sync::Arc;

use crate::elements::BasisEval;
use crate::error::{FemError, Result};
use crate::linalg::{SparseMatrix, TripletBuilder};
use crate::mesh::CellKind;
use crate::quadrature::{gauss_rule, quad_order_for, Geometry, QuadRule};
use crate::spaces::{Field, Space};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BilinearKind {
    /// `int c grad(phi_j) . grad(psi_i)`, scalar Lagrange.
    Diffusion,
    /// `int c phi_j psi_i`, any scalar family (componentwise for vector spaces).
    Mass,
    /// `int c phi_j . psi_i`, Raviart-Thomas.
    VectorFEMass,
    /// `int c div(phi_j) psi_i`, Raviart-Thomas trial, scalar test.
    VectorFEDivergence,
    /// `int c grad(q_j) . v_i`, scalar trial, vector Lagrange test (G).
    GradPressure,
    /// `int c grad(u_j) : grad(v_i)`, vector Lagrange (L).
    VectorDiffusion,
    /// `int c div(u_j) q_i`, vector Lagrange trial, scalar test (D).
    VelocityDivergence,
}

/// Right-hand side functionals.
pub enum LinearForm<'a> {
    /// `int f psi_i` on a scalar space.
    DomainLoad(&'a dyn Fn([f64; 2]) -> f64),
    /// `int f . phi_i` on a Raviart-Thomas or vector Lagrange space.
    VectorDomainLoad(&'a dyn Fn([f64; 2]) -> [f64; 2]),
    /// `int_boundary p0 (phi_i . n)` on a Raviart-Thomas space.
    BoundaryFlux(&'a dyn Fn([f64; 2]) -> f64),
}

fn mismatch(kind: impl std::fmt::Debug, trial: &Space, test: &Space) -> FemError {
    FemError::Incompatible(format!(
        "{kind:?} with trial {:?} (dim {}) and test {:?} (dim {})",
        trial.family(),
        trial.vdim(),
        test.family(),
        test.vdim()
    ))
}

fn is_scalar(s: &Space) -> bool {
    !s.family().is_vector() && s.vdim() == 1
}

fn is_vector_lagrange(s: &Space) -> bool {
    !s.family().is_vector() && s.vdim() == 2
}

fn is_rt(s: &Space) -> bool {
    s.family().is_vector()
}

fn check_kind(kind: BilinearKind, trial: &Space, test: &Space) -> Result<()> {
    let (mt, ms) = (trial.mesh(), test.mesh());
    if !Arc::ptr_eq(mt, ms) && (mt.vertices() != ms.vertices() || mt.num_cells() != ms.num_cells()) {
        return Err(FemError::Incompatible("trial and test spaces live on different meshes".into()));
    }
    let same = trial.family() == test.family() && trial.vdim() == test.vdim();
    let ok = match kind {
        BilinearKind::Diffusion => same && is_scalar(trial) && trial.family().is_continuous(),
        BilinearKind::Mass => !is_rt(trial) && !is_rt(test) && trial.vdim() == test.vdim(),
        BilinearKind::VectorFEMass => is_rt(trial) && is_rt(test),
        BilinearKind::VectorFEDivergence => is_rt(trial) && is_scalar(test),
        BilinearKind::GradPressure => is_scalar(trial) && is_vector_lagrange(test),
        BilinearKind::VectorDiffusion => same && is_vector_lagrange(trial),
        BilinearKind::VelocityDivergence => is_vector_lagrange(trial) && is_scalar(test),
    };
    if ok {
        Ok(())
    } else {
        Err(mismatch(kind, trial, test))
    }
}

/// Rule used for forms coupling spaces of the given polynomial degrees.
pub fn rule_for(kind: CellKind, degree: usize) -> Result<QuadRule> {
    gauss_rule(Geometry::from(kind), quad_order_for(degree))
}

/// Reference tabulation of a space at every point of a rule.
fn tabulate(space: &Space, rule: &QuadRule) -> Vec<BasisEval> {
    rule.points.iter().map(|&p| space.eval_reference(p)).collect()
}

/// Generic cell loop: `kernel(test, trial, weight, local)` accumulates into
/// the row-major `test_len x trial_len` local matrix at one quadrature point.
fn assemble_with(
    trial: &Space,
    test: &Space,
    rule: &QuadRule,
    symmetric: bool,
    mut kernel: impl FnMut(usize, &BasisEval, &BasisEval, f64, &mut [f64]),
) -> Result<SparseMatrix> {
    let mesh = trial.mesh();
    let (nt, nr) = (test.local_size() * test.vdim(), trial.local_size() * trial.vdim());
    let tab_trial = tabulate(trial, rule);
    let tab_test = tabulate(test, rule);
    let mut t = TripletBuilder::with_capacity(test.ndofs(), trial.ndofs(), mesh.num_cells() * nt * nr);
    let mut local = vec![0.0; nt * nr];
    for c in 0..mesh.num_cells() {
        local.iter_mut().for_each(|v| *v = 0.0);
        for (q, (p, w)) in rule.iter().enumerate() {
            let geom = mesh.cell_geometry(c, p)?;
            let et = test.map_reference(c, &geom, &tab_test[q]);
            let er = trial.map_reference(c, &geom, &tab_trial[q]);
            kernel(c, &et, &er, w * geom.det, &mut local);
        }
        if symmetric {
            // kernels fill only j >= i
            for i in 0..nt {
                for j in 0..i {
                    local[i * nr + j] = local[j * nr + i];
                }
            }
        }
        let rows = test.cell_dofs(c);
        let cols = trial.cell_dofs(c);
        for (i, &r) in rows.iter().enumerate() {
            for (j, &col) in cols.iter().enumerate() {
                t.add(r, col, local[i * nr + j]);
            }
        }
    }
    Ok(t.build())
}

/// Assembles a bilinear form with scalar coefficient `coeff`.
pub fn assemble_bilinear(kind: BilinearKind, trial: &Space, test: &Space, coeff: f64) -> Result<SparseMatrix> {
    check_kind(kind, trial, test)?;
    let degree = trial.family().polynomial_degree().max(test.family().polynomial_degree());
    let rule = rule_for(trial.mesh().kind(), degree)?;
    let (nr, vdim) = (trial.local_size() * trial.vdim(), trial.vdim());
    let symmetric = matches!(
        kind,
        BilinearKind::Diffusion | BilinearKind::VectorFEMass | BilinearKind::VectorDiffusion
    ) || (kind == BilinearKind::Mass && trial.family() == test.family());
    match kind {
        BilinearKind::Diffusion => assemble_with(trial, test, &rule, true, |_, et, er, wt, loc| {
            let s = coeff * wt;
            for (i, gi) in et.gradients.iter().enumerate() {
                for (j, gj) in er.gradients.iter().enumerate().skip(i) {
                    loc[i * nr + j] += s * (gi[0] * gj[0] + gi[1] * gj[1]);
                }
            }
        }),
        BilinearKind::Mass => assemble_with(trial, test, &rule, symmetric, |_, et, er, wt, loc| {
            let s = coeff * wt;
            for (i, vi) in et.values.iter().enumerate() {
                let start = if symmetric { i } else { 0 };
                for (j, vj) in er.values.iter().enumerate().skip(start) {
                    for d in 0..vdim {
                        loc[(i * vdim + d) * nr + j * vdim + d] += s * vi * vj;
                    }
                }
            }
        }),
        BilinearKind::VectorFEMass => assemble_with(trial, test, &rule, true, |_, et, er, wt, loc| {
            let s = coeff * wt;
            for (i, vi) in et.vectors.iter().enumerate() {
                for (j, vj) in er.vectors.iter().enumerate().skip(i) {
                    loc[i * nr + j] += s * (vi[0] * vj[0] + vi[1] * vj[1]);
                }
            }
        }),
        BilinearKind::VectorFEDivergence => assemble_with(trial, test, &rule, false, |_, et, er, wt, loc| {
            let s = coeff * wt;
            for (i, qi) in et.values.iter().enumerate() {
                for (j, dj) in er.divergences.iter().enumerate() {
                    loc[i * nr + j] += s * qi * dj;
                }
            }
        }),
        BilinearKind::GradPressure => assemble_with(trial, test, &rule, false, |_, et, er, wt, loc| {
            let s = coeff * wt;
            for (i, vi) in et.values.iter().enumerate() {
                for (j, gj) in er.gradients.iter().enumerate() {
                    for d in 0..2 {
                        loc[(i * 2 + d) * nr + j] += s * vi * gj[d];
                    }
                }
            }
        }),
        BilinearKind::VectorDiffusion => assemble_with(trial, test, &rule, true, |_, et, er, wt, loc| {
            let s = coeff * wt;
            for (i, gi) in et.gradients.iter().enumerate() {
                for (j, gj) in er.gradients.iter().enumerate().skip(i) {
                    let v = s * (gi[0] * gj[0] + gi[1] * gj[1]);
                    for d in 0..2 {
                        loc[(i * 2 + d) * nr + j * 2 + d] += v;
                    }
                }
            }
        }),
        BilinearKind::VelocityDivergence => assemble_with(trial, test, &rule, false, |_, et, er, wt, loc| {
            let s = coeff * wt;
            for (i, qi) in et.values.iter().enumerate() {
                for (j, gj) in er.gradients.iter().enumerate() {
                    for d in 0..2 {
                        loc[i * nr + j * 2 + d] += s * qi * gj[d];
                    }
                }
            }
        }),
    }
}

/// Quadrature degree used for the convection term of an order-`k` velocity:
/// the integrand `u . grad(phi) phi` has degree `3k` per variable.
pub fn convection_degree(k: usize) -> usize {
    3 * k + 1
}

/// Linearized convection `C(u)[I, i] = int ((u . grad) phi_i) . phi_I` on
/// the space of `u` (vector Lagrange).
pub fn assemble_convection(u: &Field) -> Result<SparseMatrix> {
    let space = u.space();
    if !is_vector_lagrange(space) {
        return Err(FemError::Incompatible(format!("convection needs a vector Lagrange field, got {:?}", space.family())));
    }
    let rule = gauss_rule(Geometry::from(space.mesh().kind()), convection_degree(space.family().order))?;
    let nr = space.local_size() * 2;
    let coeffs = u.coeffs();
    assemble_with(space, space, &rule, false, |c, et, er, wt, loc| {
        let nodes = space.cell_nodes(c);
        let mut uh = [0.0; 2];
        for (&n, v) in nodes.iter().zip(&er.values) {
            uh[0] += coeffs[2 * n] * v;
            uh[1] += coeffs[2 * n + 1] * v;
        }
        for (m, vm) in et.values.iter().enumerate() {
            for (n, gn) in er.gradients.iter().enumerate() {
                let a = wt * vm * (uh[0] * gn[0] + uh[1] * gn[1]);
                loc[(m * 2) * nr + n * 2] += a;
                loc[(m * 2 + 1) * nr + n * 2 + 1] += a;
            }
        }
    })
}

/// Assembles a right-hand side vector.
pub fn assemble_linear(form: LinearForm<'_>, space: &Space) -> Result<Vec<f64>> {
    let mesh = space.mesh();
    let rule = rule_for(mesh.kind(), space.family().polynomial_degree())?;
    let tab = tabulate(space, &rule);
    let mut b = vec![0.0; space.ndofs()];
    match form {
        LinearForm::DomainLoad(f) => {
            if !is_scalar(space) {
                return Err(FemError::Incompatible(format!("DomainLoad on {:?}", space.family())));
            }
            for c in 0..mesh.num_cells() {
                let nodes = space.cell_nodes(c);
                for (q, (p, w)) in rule.iter().enumerate() {
                    let geom = mesh.cell_geometry(c, p)?;
                    let fx = f(mesh.map_point(c, p)) * w * geom.det;
                    for (&n, v) in nodes.iter().zip(&tab[q].values) {
                        b[n] += fx * v;
                    }
                }
            }
        }
        LinearForm::VectorDomainLoad(f) => {
            if !(is_rt(space) || is_vector_lagrange(space)) {
                return Err(FemError::Incompatible(format!("VectorDomainLoad on {:?}", space.family())));
            }
            for c in 0..mesh.num_cells() {
                let nodes = space.cell_nodes(c);
                for (q, (p, w)) in rule.iter().enumerate() {
                    let geom = mesh.cell_geometry(c, p)?;
                    let fx = f(mesh.map_point(c, p));
                    let s = w * geom.det;
                    if is_rt(space) {
                        let e = space.map_reference(c, &geom, &tab[q]);
                        for (&n, v) in nodes.iter().zip(&e.vectors) {
                            b[n] += s * (fx[0] * v[0] + fx[1] * v[1]);
                        }
                    } else {
                        for (&n, v) in nodes.iter().zip(&tab[q].values) {
                            b[2 * n] += s * fx[0] * v;
                            b[2 * n + 1] += s * fx[1] * v;
                        }
                    }
                }
            }
        }
        LinearForm::BoundaryFlux(p0) => {
            if !is_rt(space) {
                return Err(FemError::Incompatible(format!("BoundaryFlux on {:?}", space.family())));
            }
            let edge_rule = gauss_rule(Geometry::Edge, quad_order_for(space.family().polynomial_degree()))?;
            let refv = mesh.kind().reference_vertices();
            let nv = mesh.kind().vertex_count();
            for bi in 0..mesh.boundary().len() {
                let e = mesh.boundary_edge(bi);
                let (c, _) = mesh.edge_cells(e);
                let l = mesh.local_edge(c, e).expect("boundary edge belongs to its cell");
                let verts = mesh.cell(c);
                let (pa, pb) = (mesh.vertices()[verts[l]], mesh.vertices()[verts[(l + 1) % nv]]);
                // outward normal scaled by the edge length (CCW cells)
                let nds = [pb[1] - pa[1], pa[0] - pb[0]];
                let (ra, rb) = (refv[l], refv[(l + 1) % nv]);
                let nodes = space.cell_nodes(c);
                for (p, w) in edge_rule.iter() {
                    let s = p[0];
                    let xi = [ra[0] + s * (rb[0] - ra[0]), ra[1] + s * (rb[1] - ra[1])];
                    let (_, ev) = space.eval_physical(c, xi)?;
                    let g = p0(mesh.map_point(c, xi)) * w;
                    for (&n, v) in nodes.iter().zip(&ev.vectors) {
                        b[n] += g * (v[0] * nds[0] + v[1] * nds[1]);
                    }
                }
            }
        }
    }
    Ok(b)
}

/// Symmetric elimination of essential DOFs: row and column `d` are zeroed,
/// the diagonal set to 1, and `b[d] = value`; the column contributions move
/// into `b`.
pub fn apply_essential_bc(a: &mut SparseMatrix, b: &mut [f64], dofs: &[usize], values: &[f64]) -> Result<()> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(FemError::InvalidArgument("essential conditions need a square matrix".into()));
    }
    if b.len() != n {
        return Err(FemError::DimensionMismatch { expected: n, got: b.len() });
    }
    if values.len() != dofs.len() {
        return Err(FemError::DimensionMismatch { expected: dofs.len(), got: values.len() });
    }
    if dofs.is_empty() {
        return Ok(());
    }
    let (mask, full) = dof_mask(n, dofs, values)?;
    let owned = std::mem::replace(a, SparseMatrix::zeros(0, 0));
    *a = owned.with_full_diagonal();
    a.eliminate_columns(&mask, &full, b);
    a.clear_rows(&mask, Some(1.0));
    for (&d, &v) in dofs.iter().zip(values) {
        b[d] = v;
    }
    Ok(())
}

pub(crate) fn dof_mask(n: usize, dofs: &[usize], values: &[f64]) -> Result<(Vec<bool>, Vec<f64>)> {
    let mut mask = vec![false; n];
    let mut full = vec![0.0; n];
    for (&d, &v) in dofs.iter().zip(values) {
        if d >= n {
            return Err(FemError::DofOutOfRange { dof: d, size: n });
        }
        mask[d] = true;
        full[d] = v;
    }
    Ok((mask, full))
}

/// Values of a scalar boundary function at the nodes of `dofs`.
pub fn scalar_dof_values(space: &Space, dofs: &[usize], g: impl Fn([f64; 2]) -> f64) -> Vec<f64> {
    dofs.iter().map(|&d| g(space.node_coords()[d / space.vdim()])).collect()
}

/// Component values of a vector boundary function at the nodes of `dofs`.
pub fn vector_dof_values(space: &Space, dofs: &[usize], g: impl Fn([f64; 2]) -> [f64; 2]) -> Vec<f64> {
    dofs.iter().map(|&d| g(space.node_coords()[d / 2])[d % 2]).collect()
}
