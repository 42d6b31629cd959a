//! Nodal P_k (triangle) and Q_k (square) bases on equispaced lattices.
//!
//! P_k uses the barycentric product form: for a lattice node with barycentric
//! multi-index `alpha` (|alpha| = k),
//! `phi = prod_c prod_{m < alpha_c} (k lambda_c - m) / (m + 1)`.
//! Q_k is the tensor product of 1D Lagrange polynomials.

use super::{BasisEval, ElementFamily, FamilyKind};
use crate::error::Result;
use crate::mesh::CellKind;

/// Mesh entity a local node is attached to, used to glue continuous spaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeEntity {
    Vertex(usize),
    /// `index` counts from the start of the local edge direction.
    Edge { edge: usize, index: usize },
    Interior(usize),
}

#[derive(Debug, Clone)]
pub struct ScalarElement {
    family: ElementFamily,
    nodes: Vec<[f64; 2]>,
    entities: Vec<NodeEntity>,
    /// Barycentric multi-index (P) or tensor index (Q, third entry unused).
    lattice: Vec<[usize; 3]>,
}

impl ScalarElement {
    pub fn new(family: ElementFamily) -> Result<Self> {
        family.validate()?;
        let k = family.order;
        let continuous = family.is_continuous();
        let mut lattice = Vec::with_capacity(family.dofs_per_cell());
        let mut entities = Vec::with_capacity(family.dofs_per_cell());
        match family.cell_kind() {
            _ if k == 0 => {
                lattice.push([0, 0, 0]);
                entities.push(NodeEntity::Interior(0));
            }
            CellKind::Triangle => {
                lattice.extend([[k, 0, 0], [0, k, 0], [0, 0, k]]);
                entities.extend((0..3).map(NodeEntity::Vertex));
                for edge in 0..3 {
                    for t in 1..k {
                        lattice.push(match edge {
                            0 => [k - t, t, 0],
                            1 => [0, k - t, t],
                            _ => [t, 0, k - t],
                        });
                        entities.push(NodeEntity::Edge { edge, index: t - 1 });
                    }
                }
                let mut n = 0;
                for j in 1..k {
                    for i in 1..k - j {
                        lattice.push([k - i - j, i, j]);
                        entities.push(NodeEntity::Interior(n));
                        n += 1;
                    }
                }
            }
            CellKind::Quad => {
                lattice.extend([[0, 0, 0], [k, 0, 0], [k, k, 0], [0, k, 0]]);
                entities.extend((0..4).map(NodeEntity::Vertex));
                for edge in 0..4 {
                    for t in 1..k {
                        lattice.push(match edge {
                            0 => [t, 0, 0],
                            1 => [k, t, 0],
                            2 => [k - t, k, 0],
                            _ => [0, k - t, 0],
                        });
                        entities.push(NodeEntity::Edge { edge, index: t - 1 });
                    }
                }
                let mut n = 0;
                for j in 1..k {
                    for i in 1..k {
                        lattice.push([i, j, 0]);
                        entities.push(NodeEntity::Interior(n));
                        n += 1;
                    }
                }
            }
        }
        if !continuous {
            entities = (0..lattice.len()).map(NodeEntity::Interior).collect();
        }
        let nodes = lattice
            .iter()
            .map(|a| {
                if k == 0 {
                    match family.cell_kind() {
                        CellKind::Triangle => [1.0 / 3.0, 1.0 / 3.0],
                        CellKind::Quad => [0.5, 0.5],
                    }
                } else {
                    match family.cell_kind() {
                        CellKind::Triangle => [a[1] as f64 / k as f64, a[2] as f64 / k as f64],
                        CellKind::Quad => [a[0] as f64 / k as f64, a[1] as f64 / k as f64],
                    }
                }
            })
            .collect();
        Ok(Self { family, nodes, entities, lattice })
    }

    pub fn family(&self) -> ElementFamily {
        self.family
    }

    /// Reference coordinates of the nodes in local order.
    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn entities(&self) -> &[NodeEntity] {
        &self.entities
    }

    pub fn eval(&self, xi: [f64; 2]) -> BasisEval {
        let n = self.lattice.len();
        let mut values = Vec::with_capacity(n);
        let mut gradients = Vec::with_capacity(n);
        let k = self.family.order;
        if k == 0 {
            values.push(1.0);
            gradients.push([0.0, 0.0]);
        } else {
            match self.family.kind {
                FamilyKind::LagrangeP | FamilyKind::DiscontinuousP => {
                    let lam = [1.0 - xi[0] - xi[1], xi[0], xi[1]];
                    for a in &self.lattice {
                        let f: [(f64, f64); 3] = std::array::from_fn(|c| lattice_factor(k, a[c], lam[c]));
                        let v = f[0].0 * f[1].0 * f[2].0;
                        let d0 = f[0].1 * f[1].0 * f[2].0;
                        values.push(v);
                        gradients.push([
                            -d0 + f[0].0 * f[1].1 * f[2].0,
                            -d0 + f[0].0 * f[1].0 * f[2].1,
                        ]);
                    }
                }
                _ => {
                    let lx: Vec<(f64, f64)> = (0..=k).map(|i| lagrange_1d(k, i, xi[0])).collect();
                    let ly: Vec<(f64, f64)> = (0..=k).map(|j| lagrange_1d(k, j, xi[1])).collect();
                    for a in &self.lattice {
                        let ((vx, dx), (vy, dy)) = (lx[a[0]], ly[a[1]]);
                        values.push(vx * vy);
                        gradients.push([dx * vy, vx * dy]);
                    }
                }
            }
        }
        BasisEval { values, gradients, ..Default::default() }
    }
}

/// `R(t) = prod_{m < a} (k t - m) / (m + 1)` and its derivative.
fn lattice_factor(k: usize, a: usize, t: f64) -> (f64, f64) {
    let kt = k as f64 * t;
    let mut value = 1.0;
    let mut deriv = 0.0;
    for m in 0..a {
        let c = (m + 1) as f64;
        let factor = (kt - m as f64) / c;
        deriv = deriv * factor + value * k as f64 / c;
        value *= factor;
    }
    (value, deriv)
}

/// 1D Lagrange polynomial on nodes `j/k` that is 1 at node `i`, with derivative.
fn lagrange_1d(k: usize, i: usize, t: f64) -> (f64, f64) {
    let xi = i as f64 / k as f64;
    let mut value = 1.0;
    let mut deriv = 0.0;
    for j in 0..=k {
        if j == i {
            continue;
        }
        let xj = j as f64 / k as f64;
        let factor = (t - xj) / (xi - xj);
        deriv = deriv * factor + value / (xi - xj);
        value *= factor;
    }
    (value, deriv)
}
