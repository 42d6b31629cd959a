//! Raviart-Thomas RT_0 and RT_1 on the reference triangle.
//!
//! The basis is dual to these degrees of freedom, in local order:
//! - for each local edge `l` (vertex `l` to vertex `l+1`) and `j = 0..=k`, the
//!   normal moment `int_e (v . n) P_j(s) ds`, with `n ds` the outward normal
//!   scaled by edge length and `P_0 = 1`, `P_1 = 2s - 1` along the local edge;
//! - for k = 1, the interior moments `int_K v_x` and `int_K v_y`.
//!
//! Reversing an edge flips the sign of the `P_0` moment and keeps the `P_1`
//! moment, which is what the global sign table in `spaces` relies on.

use nalgebra::DMatrix;

use super::BasisEval;
use crate::error::{FemError, Result};
use crate::mesh::CellKind;
use crate::quadrature::{gauss_rule, Geometry};

#[derive(Debug, Clone)]
pub struct RtElement {
    order: usize,
    /// Row `i` holds the coefficients of basis `i` in the primal set.
    coeffs: Vec<Vec<f64>>,
}

/// Spanning set of RT_k: `[P_k]^2 + x P_k^hom`. Returns values and divergences.
fn primal(k: usize, x: [f64; 2]) -> (Vec<[f64; 2]>, Vec<f64>) {
    let [s, t] = x;
    match k {
        0 => (vec![[1.0, 0.0], [0.0, 1.0], [s, t]], vec![0.0, 0.0, 2.0]),
        _ => (
            vec![
                [1.0, 0.0],
                [s, 0.0],
                [t, 0.0],
                [0.0, 1.0],
                [0.0, s],
                [0.0, t],
                [s * s, s * t],
                [s * t, t * t],
            ],
            vec![0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 3.0 * s, 3.0 * t],
        ),
    }
}

impl RtElement {
    pub fn new(order: usize) -> Result<Self> {
        if order > 1 {
            return Err(FemError::UnsupportedOrder { what: "Raviart-Thomas", order });
        }
        let n = (order + 1) * (order + 3);
        let mut dofs = DMatrix::<f64>::zeros(n, n);
        let verts = CellKind::Triangle.reference_vertices();
        let edge_rule = gauss_rule(Geometry::Edge, 2 * order + 2)?;
        let mut row = 0;
        for l in 0..3 {
            let (a, b) = (verts[l], verts[(l + 1) % 3]);
            let tangent = [b[0] - a[0], b[1] - a[1]];
            let normal = [tangent[1], -tangent[0]];
            for j in 0..=order {
                for (p, w) in edge_rule.iter() {
                    let s = p[0];
                    let q = if j == 0 { 1.0 } else { 2.0 * s - 1.0 };
                    let (vals, _) = primal(order, [a[0] + s * tangent[0], a[1] + s * tangent[1]]);
                    for (m, v) in vals.iter().enumerate() {
                        dofs[(row, m)] += w * q * (v[0] * normal[0] + v[1] * normal[1]);
                    }
                }
                row += 1;
            }
        }
        if order == 1 {
            let rule = gauss_rule(Geometry::Triangle, 2)?;
            for (p, w) in rule.iter() {
                let (vals, _) = primal(order, p);
                for (m, v) in vals.iter().enumerate() {
                    dofs[(row, m)] += w * v[0];
                    dofs[(row + 1, m)] += w * v[1];
                }
            }
        }
        // dofs * C = I: column i of C are the primal coefficients of basis i
        let inv = dofs.try_inverse().expect("RT degrees of freedom are unisolvent");
        let coeffs = (0..n).map(|i| (0..n).map(|m| inv[(m, i)]).collect()).collect();
        Ok(Self { order, coeffs })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Number of local DOFs attached to each edge.
    pub fn dofs_per_edge(&self) -> usize {
        self.order + 1
    }

    pub fn eval(&self, xi: [f64; 2]) -> BasisEval {
        let (pv, pd) = primal(self.order, xi);
        let mut vectors = Vec::with_capacity(self.len());
        let mut divergences = Vec::with_capacity(self.len());
        for c in &self.coeffs {
            let mut v = [0.0; 2];
            let mut d = 0.0;
            for (m, &cm) in c.iter().enumerate() {
                v[0] += cm * pv[m][0];
                v[1] += cm * pv[m][1];
                d += cm * pd[m];
            }
            vectors.push(v);
            divergences.push(d);
        }
        BasisEval { vectors, divergences, ..Default::default() }
    }

    /// Local DOF values of a reference vector field `v_ref` (already pulled
    /// back with the inverse Piola map).
    pub fn local_dofs(&self, v_ref: impl Fn([f64; 2]) -> [f64; 2]) -> Result<Vec<f64>> {
        let k = self.order;
        let verts = CellKind::Triangle.reference_vertices();
        let edge_rule = gauss_rule(Geometry::Edge, 12)?;
        let mut out = Vec::with_capacity(self.len());
        for l in 0..3 {
            let (a, b) = (verts[l], verts[(l + 1) % 3]);
            let tangent = [b[0] - a[0], b[1] - a[1]];
            let normal = [tangent[1], -tangent[0]];
            for j in 0..=k {
                let mut m = 0.0;
                for (p, w) in edge_rule.iter() {
                    let s = p[0];
                    let q = if j == 0 { 1.0 } else { 2.0 * s - 1.0 };
                    let v = v_ref([a[0] + s * tangent[0], a[1] + s * tangent[1]]);
                    m += w * q * (v[0] * normal[0] + v[1] * normal[1]);
                }
                out.push(m);
            }
        }
        if k == 1 {
            let rule = gauss_rule(Geometry::Triangle, 12)?;
            let (mut mx, mut my) = (0.0, 0.0);
            for (p, w) in rule.iter() {
                let v = v_ref(p);
                mx += w * v[0];
                my += w * v[1];
            }
            out.push(mx);
            out.push(my);
        }
        Ok(out)
    }
}
