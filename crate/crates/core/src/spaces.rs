//! Global finite element spaces and fields over a mesh.
//!
//! Scalar functions ("nodes") are numbered vertices first, then edge nodes
//! (edge by edge, ordered from the lower to the higher vertex index), then
//! cell-interior nodes. Vector Lagrange spaces interleave components per node:
//! DOF `2 n + c` is component `c` at node `n`. Raviart-Thomas DOFs are edge
//! moments per global edge followed by interior moments per cell; a per-cell
//! sign table maps local to global edge moments.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::elements::{BasisEval, ElementFamily, FamilyKind, NodeEntity, ReferenceElement};
use crate::error::{FemError, Result};
use crate::mesh::{CellGeometry, Mesh};

#[derive(Debug)]
pub struct Space {
    mesh: Arc<Mesh>,
    family: ElementFamily,
    element: ReferenceElement,
    vdim: usize,
    nnodes: usize,
    local: usize,
    cell_nodes: Vec<usize>,
    cell_signs: Vec<f64>,
    node_coords: Vec<[f64; 2]>,
}

impl Space {
    /// Builds the DOF map of `family` over `mesh` with `vdim` components
    /// (1, or 2 for vector Lagrange spaces).
    pub fn new(mesh: Arc<Mesh>, family: ElementFamily, vdim: usize) -> Result<Arc<Space>> {
        family.validate()?;
        if family.cell_kind() != mesh.kind() {
            return Err(FemError::FamilyMismatch { family, kind: mesh.kind() });
        }
        if !(vdim == 1 || vdim == 2) || (family.is_vector() && vdim != 1) {
            return Err(FemError::InvalidArgument(format!("vector dimension {vdim} for {family:?}")));
        }
        let element = ReferenceElement::new(family)?;
        let local = family.dofs_per_cell();
        let ncells = mesh.num_cells();
        let nv = mesh.num_vertices();
        let ne = mesh.num_edges();
        let k = family.order;
        let mut cell_nodes = Vec::with_capacity(ncells * local);
        let mut cell_signs = Vec::new();
        let mut node_coords = Vec::new();

        let nnodes = match &element {
            ReferenceElement::Scalar(el) if family.is_continuous() => {
                let per_edge = k - 1;
                let per_cell = local - mesh.kind().vertex_count() * (1 + per_edge);
                let total = nv + ne * per_edge + ncells * per_cell;
                node_coords = vec![[0.0; 2]; total];
                for c in 0..ncells {
                    let verts = mesh.cell(c);
                    for (i, entity) in el.entities().iter().enumerate() {
                        let node = match *entity {
                            NodeEntity::Vertex(v) => verts[v],
                            NodeEntity::Edge { edge, index } => {
                                let (e, same) = mesh.cell_edge(c, edge);
                                let pos = if same { index } else { per_edge - 1 - index };
                                nv + e * per_edge + pos
                            }
                            NodeEntity::Interior(n) => nv + ne * per_edge + c * per_cell + n,
                        };
                        node_coords[node] = mesh.map_point(c, el.nodes()[i]);
                        cell_nodes.push(node);
                    }
                }
                total
            }
            ReferenceElement::Scalar(el) => {
                for c in 0..ncells {
                    for (i, &xi) in el.nodes().iter().enumerate() {
                        cell_nodes.push(c * local + i);
                        node_coords.push(mesh.map_point(c, xi));
                    }
                }
                ncells * local
            }
            ReferenceElement::RaviartThomas(el) => {
                let per_edge = el.dofs_per_edge();
                let per_cell = local - 3 * per_edge;
                cell_signs.reserve(ncells * local);
                for c in 0..ncells {
                    for l in 0..3 {
                        let (e, same) = mesh.cell_edge(c, l);
                        for j in 0..per_edge {
                            cell_nodes.push(e * per_edge + j);
                            // reversal flips the outward normal and mirrors P_j
                            let odd = j % 2 == 1;
                            cell_signs.push(if same || odd { 1.0 } else { -1.0 });
                        }
                    }
                    for n in 0..per_cell {
                        cell_nodes.push(ne * per_edge + c * per_cell + n);
                        cell_signs.push(1.0);
                    }
                }
                ne * per_edge + ncells * per_cell
            }
        };

        Ok(Arc::new(Space {
            mesh,
            family,
            element,
            vdim,
            nnodes,
            local,
            cell_nodes,
            cell_signs,
            node_coords,
        }))
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn family(&self) -> ElementFamily {
        self.family
    }

    pub fn element(&self) -> &ReferenceElement {
        &self.element
    }

    pub fn vdim(&self) -> usize {
        self.vdim
    }

    /// Number of distinct global scalar (or RT) basis functions.
    pub fn num_nodes(&self) -> usize {
        self.nnodes
    }

    pub fn ndofs(&self) -> usize {
        self.nnodes * self.vdim
    }

    /// Local shape functions per cell (per component).
    pub fn local_size(&self) -> usize {
        self.local
    }

    pub fn cell_nodes(&self, c: usize) -> &[usize] {
        &self.cell_nodes[c * self.local..(c + 1) * self.local]
    }

    /// Orientation signs of the local basis (Raviart-Thomas only).
    pub fn cell_signs(&self, c: usize) -> Option<&[f64]> {
        if self.cell_signs.is_empty() {
            None
        } else {
            Some(&self.cell_signs[c * self.local..(c + 1) * self.local])
        }
    }

    /// Global DOFs of cell `c`, component-interleaved for vector spaces.
    pub fn cell_dofs(&self, c: usize) -> Vec<usize> {
        self.cell_nodes(c)
            .iter()
            .flat_map(|&n| (0..self.vdim).map(move |d| n * self.vdim + d))
            .collect()
    }

    /// Physical coordinates of the nodes of nodal (Lagrange/discontinuous) spaces.
    pub fn node_coords(&self) -> &[[f64; 2]] {
        &self.node_coords
    }

    /// Reference basis evaluation at `xi`.
    pub fn eval_reference(&self, xi: [f64; 2]) -> BasisEval {
        self.element.eval(xi)
    }

    /// Physical basis at `xi` in cell `c`, with RT signs applied.
    pub fn eval_physical(&self, c: usize, xi: [f64; 2]) -> Result<(CellGeometry, BasisEval)> {
        let geom = self.mesh.cell_geometry(c, xi)?;
        let reference = self.element.eval(xi);
        Ok((geom, self.map_reference(c, &geom, &reference)))
    }

    /// Maps a reference tabulation to cell `c` (gradients or Piola, plus signs).
    pub fn map_reference(&self, c: usize, geom: &CellGeometry, reference: &BasisEval) -> BasisEval {
        match self.family.kind {
            FamilyKind::RaviartThomas => {
                let mut e = crate::elements::piola_map(geom, reference);
                if let Some(signs) = self.cell_signs(c) {
                    for (i, s) in signs.iter().enumerate() {
                        e.vectors[i][0] *= s;
                        e.vectors[i][1] *= s;
                        e.divergences[i] *= s;
                    }
                }
                e
            }
            _ => crate::elements::map_scalar(geom, reference),
        }
    }

    /// DOFs of a continuous Lagrange space lying on boundary edges whose
    /// attribute is in `attributes`, sorted ascending.
    pub fn essential_dofs(&self, attributes: &BTreeSet<i32>) -> Result<Vec<usize>> {
        if !self.family.is_continuous() {
            return Err(FemError::InvalidArgument(format!(
                "essential boundary conditions need a continuous Lagrange space, got {:?}",
                self.family
            )));
        }
        let present = self.mesh.boundary_attributes();
        if let Some(&a) = attributes.iter().find(|a| !present.contains(a)) {
            return Err(FemError::UnknownAttribute(a));
        }
        let per_edge = self.family.order - 1;
        let nv = self.mesh.num_vertices();
        let mut nodes = BTreeSet::new();
        for (b, be) in self.mesh.boundary().iter().enumerate() {
            if !attributes.contains(&be.attribute) {
                continue;
            }
            let e = self.mesh.boundary_edge(b);
            nodes.extend(be.vertices);
            nodes.extend((0..per_edge).map(|p| nv + e * per_edge + p));
        }
        Ok(nodes.into_iter().flat_map(|n| (0..self.vdim).map(move |d| n * self.vdim + d)).collect())
    }

    /// Essential DOFs on every boundary attribute.
    pub fn boundary_dofs(&self) -> Result<Vec<usize>> {
        self.essential_dofs(&self.mesh.boundary_attributes().into_iter().collect())
    }
}

/// A function that can be evaluated cell-by-cell at reference points.
pub trait CellFunction {
    fn components(&self) -> usize;
    fn eval(&self, mesh: &Mesh, cell: usize, xi: [f64; 2], out: &mut [f64]);
}

/// Analytic scalar function of the physical coordinates.
pub struct ScalarFn<F>(pub F);

/// Analytic vector function of the physical coordinates.
pub struct VectorFn<F>(pub F);

impl<F: Fn([f64; 2]) -> f64> CellFunction for ScalarFn<F> {
    fn components(&self) -> usize {
        1
    }
    fn eval(&self, mesh: &Mesh, cell: usize, xi: [f64; 2], out: &mut [f64]) {
        out[0] = (self.0)(mesh.map_point(cell, xi));
    }
}

impl<F: Fn([f64; 2]) -> [f64; 2]> CellFunction for VectorFn<F> {
    fn components(&self) -> usize {
        2
    }
    fn eval(&self, mesh: &Mesh, cell: usize, xi: [f64; 2], out: &mut [f64]) {
        let v = (self.0)(mesh.map_point(cell, xi));
        out[..2].copy_from_slice(&v);
    }
}

/// Coefficient vector bound to a space.
#[derive(Debug, Clone)]
pub struct Field {
    space: Arc<Space>,
    coeffs: Vec<f64>,
}

impl Field {
    pub fn zeros(space: Arc<Space>) -> Field {
        let n = space.ndofs();
        Field { space, coeffs: vec![0.0; n] }
    }

    pub fn from_coeffs(space: Arc<Space>, coeffs: Vec<f64>) -> Result<Field> {
        if coeffs.len() != space.ndofs() {
            return Err(FemError::DimensionMismatch { expected: space.ndofs(), got: coeffs.len() });
        }
        Ok(Field { space, coeffs })
    }

    pub fn space(&self) -> &Arc<Space> {
        &self.space
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// Value of a scalar field.
    pub fn value(&self, c: usize, xi: [f64; 2]) -> f64 {
        let e = self.space.eval_reference(xi);
        self.space.cell_nodes(c).iter().zip(&e.values).map(|(&n, v)| self.coeffs[n] * v).sum()
    }

    /// Physical gradient of a scalar field.
    pub fn gradient(&self, c: usize, xi: [f64; 2]) -> Result<[f64; 2]> {
        let (_, e) = self.space.eval_physical(c, xi)?;
        let mut g = [0.0; 2];
        for (&n, d) in self.space.cell_nodes(c).iter().zip(&e.gradients) {
            g[0] += self.coeffs[n] * d[0];
            g[1] += self.coeffs[n] * d[1];
        }
        Ok(g)
    }

    /// Value of a vector field (vector Lagrange or Raviart-Thomas).
    pub fn vector(&self, c: usize, xi: [f64; 2]) -> Result<[f64; 2]> {
        if self.space.family.is_vector() {
            let (_, e) = self.space.eval_physical(c, xi)?;
            let mut v = [0.0; 2];
            for (&n, phi) in self.space.cell_nodes(c).iter().zip(&e.vectors) {
                v[0] += self.coeffs[n] * phi[0];
                v[1] += self.coeffs[n] * phi[1];
            }
            Ok(v)
        } else if self.space.vdim == 2 {
            let e = self.space.eval_reference(xi);
            let mut v = [0.0; 2];
            for (&n, phi) in self.space.cell_nodes(c).iter().zip(&e.values) {
                v[0] += self.coeffs[2 * n] * phi;
                v[1] += self.coeffs[2 * n + 1] * phi;
            }
            Ok(v)
        } else {
            Err(FemError::InvalidArgument("vector value of a scalar field".into()))
        }
    }

    /// Physical Jacobian `[d u_r / d x_c]` of a vector Lagrange field.
    pub fn vector_gradient(&self, c: usize, xi: [f64; 2]) -> Result<[[f64; 2]; 2]> {
        let (_, e) = self.space.eval_physical(c, xi)?;
        let mut g = [[0.0; 2]; 2];
        for (&n, d) in self.space.cell_nodes(c).iter().zip(&e.gradients) {
            for r in 0..2 {
                g[r][0] += self.coeffs[2 * n + r] * d[0];
                g[r][1] += self.coeffs[2 * n + r] * d[1];
            }
        }
        Ok(g)
    }

    /// Divergence of a Raviart-Thomas field.
    pub fn divergence(&self, c: usize, xi: [f64; 2]) -> Result<f64> {
        let (_, e) = self.space.eval_physical(c, xi)?;
        Ok(self.space.cell_nodes(c).iter().zip(&e.divergences).map(|(&n, d)| self.coeffs[n] * d).sum())
    }
}

impl CellFunction for Field {
    fn components(&self) -> usize {
        if self.space.family.is_vector() {
            2
        } else {
            self.space.vdim
        }
    }

    fn eval(&self, _mesh: &Mesh, cell: usize, xi: [f64; 2], out: &mut [f64]) {
        if self.components() == 1 {
            out[0] = self.value(cell, xi);
        } else {
            let v = self.vector(cell, xi).expect("field geometry was validated at mesh construction");
            out[..2].copy_from_slice(&v);
        }
    }
}

/// Nodal interpolant of a scalar function (nodal families only).
pub fn interpolate_scalar(space: &Arc<Space>, f: impl Fn([f64; 2]) -> f64) -> Result<Field> {
    if space.family.is_vector() || space.vdim != 1 {
        return Err(FemError::InvalidArgument("scalar interpolation needs a scalar space".into()));
    }
    let coeffs = space.node_coords.iter().map(|&x| f(x)).collect();
    Field::from_coeffs(space.clone(), coeffs)
}

/// Interpolant of a vector function: nodal for vector Lagrange spaces, edge
/// and interior moments for Raviart-Thomas spaces.
pub fn interpolate_vector(space: &Arc<Space>, f: impl Fn([f64; 2]) -> [f64; 2]) -> Result<Field> {
    match &space.element {
        ReferenceElement::RaviartThomas(el) => {
            let mesh = &space.mesh;
            let mut coeffs = vec![0.0; space.ndofs()];
            for c in 0..mesh.num_cells() {
                // affine cell: one geometry serves every point
                let geom = mesh.cell_geometry(c, [0.0, 0.0])?;
                let local = el.local_dofs(|xi| geom.inverse_piola(f(mesh.map_point(c, xi))))?;
                let signs = space.cell_signs(c).expect("RT space has signs");
                for ((&n, s), v) in space.cell_nodes(c).iter().zip(signs).zip(local) {
                    coeffs[n] = s * v;
                }
            }
            Field::from_coeffs(space.clone(), coeffs)
        }
        ReferenceElement::Scalar(_) if space.vdim == 2 => {
            let coeffs = space.node_coords.iter().flat_map(|&x| f(x)).collect();
            Field::from_coeffs(space.clone(), coeffs)
        }
        ReferenceElement::Scalar(_) => {
            Err(FemError::InvalidArgument("vector interpolation needs a vector space".into()))
        }
    }
}
