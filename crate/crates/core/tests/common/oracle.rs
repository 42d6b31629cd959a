//! Dense brute-force evaluation of the bilinear forms: global basis
//! functions are evaluated at each point of a higher-degree rule and every
//! global (test, trial) pair is integrated directly.

use std::sync::Arc;

use fem2d::assembly::{assemble_bilinear, assemble_convection, BilinearKind};
use fem2d::elements::BasisEval;
use fem2d::mesh::Mesh;
use fem2d::quadrature::{gauss_rule, Geometry};
use fem2d::spaces::{Field, Space};
use fem2d::ElementFamily;

use super::dense_max;

/// Values, gradients (per component) and vectors of every global DOF at one
/// point; zero for DOFs not supported on the cell.
pub struct GlobalBasis {
    pub value: Vec<[f64; 2]>,
    pub grad: Vec<[[f64; 2]; 2]>,
    pub div: Vec<f64>,
}

pub fn global_basis(space: &Space, c: usize, xi: [f64; 2]) -> (f64, GlobalBasis) {
    let n = space.ndofs();
    let mut g = GlobalBasis { value: vec![[0.0; 2]; n], grad: vec![[[0.0; 2]; 2]; n], div: vec![0.0; n] };
    let (geom, e): (_, BasisEval) = space.eval_physical(c, xi).unwrap();
    let dofs = space.cell_dofs(c);
    if space.family().is_vector() {
        for (i, &d) in dofs.iter().enumerate() {
            g.value[d] = e.vectors[i];
            g.div[d] = e.divergences[i];
        }
    } else {
        let vdim = space.vdim();
        for (i, &d) in dofs.iter().enumerate() {
            let (node, comp) = (i / vdim, i % vdim);
            g.value[d][comp] = e.values[node];
            g.grad[d][comp] = e.gradients[node];
            g.div[d] = e.gradients[node][comp];
        }
    }
    (geom.det, g)
}

pub fn brute_force(kind: BilinearKind, trial: &Space, test: &Space, coeff: f64, degree: usize) -> Vec<Vec<f64>> {
    let mesh = trial.mesh();
    let rule = gauss_rule(Geometry::from(mesh.kind()), degree).unwrap();
    let mut a = vec![vec![0.0; trial.ndofs()]; test.ndofs()];
    for c in 0..mesh.num_cells() {
        for (p, w) in rule.points.iter().zip(&rule.weights) {
            let (det, u) = global_basis(trial, c, *p);
            let (_, v) = global_basis(test, c, *p);
            for (i, row) in a.iter_mut().enumerate() {
                for (j, aij) in row.iter_mut().enumerate() {
                    let f = match kind {
                        BilinearKind::Diffusion | BilinearKind::VectorDiffusion => (0..2)
                            .map(|d| v.grad[i][d][0] * u.grad[j][d][0] + v.grad[i][d][1] * u.grad[j][d][1])
                            .sum::<f64>(),
                        BilinearKind::Mass | BilinearKind::VectorFEMass => {
                            v.value[i][0] * u.value[j][0] + v.value[i][1] * u.value[j][1]
                        }
                        BilinearKind::VectorFEDivergence | BilinearKind::VelocityDivergence => v.value[i][0] * u.div[j],
                        // test vector, trial scalar gradient
                        BilinearKind::GradPressure => {
                            v.value[i][0] * u.grad[j][0][0] + v.value[i][1] * u.grad[j][0][1]
                        }
                    };
                    *aij += coeff * w * det * f;
                }
            }
        }
    }
    a
}

/// Largest entrywise difference between assembled and brute-force matrices,
/// relative to the largest oracle entry.
pub fn bilinear_error(kind: BilinearKind, trial: &Space, test: &Space) -> f64 {
    let coeff = 1.7;
    let degree = trial.family().polynomial_degree() + test.family().polynomial_degree() + 4;
    let oracle = brute_force(kind, trial, test, coeff, degree);
    let fast = assemble_bilinear(kind, trial, test, coeff).unwrap().to_dense();
    let scale = dense_max(&oracle).max(1e-300);
    let diff = oracle.iter().zip(&fast).flat_map(|(ro, rf)| ro.iter().zip(rf).map(|(o, f)| (o - f).abs()));
    diff.fold(0.0, f64::max) / scale
}

/// Relative max difference between `C(u) u` and the directly integrated
/// `N(u)_I = int ((u . grad) u) . phi_I` for a fixed pseudo-random `u`.
pub fn convection_error(m: &Arc<Mesh>, k: usize) -> f64 {
    let s = Space::new(m.clone(), ElementFamily::lagrange(m.kind(), k), 2).unwrap();
    let coeffs: Vec<f64> = (0..s.ndofs()).map(|i| ((i as f64) * 0.73).sin()).collect();
    let u = Field::from_coeffs(s.clone(), coeffs.clone()).unwrap();
    let cu = assemble_convection(&u).unwrap().spmv(&coeffs).unwrap();
    let rule = gauss_rule(Geometry::from(m.kind()), 3 * k + 4).unwrap();
    let mut n = vec![0.0; s.ndofs()];
    for c in 0..m.num_cells() {
        for (p, w) in rule.points.iter().zip(&rule.weights) {
            let (det, v) = global_basis(&s, c, *p);
            let uh = u.vector(c, *p).unwrap();
            let gu = u.vector_gradient(c, *p).unwrap();
            let conv = [uh[0] * gu[0][0] + uh[1] * gu[0][1], uh[0] * gu[1][0] + uh[1] * gu[1][1]];
            for (i, ni) in n.iter_mut().enumerate() {
                *ni += w * det * (conv[0] * v.value[i][0] + conv[1] * v.value[i][1]);
            }
        }
    }
    let scale = n.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    cu.iter().zip(&n).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / scale
}
