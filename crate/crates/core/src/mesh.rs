//! Conforming 2D meshes of triangles or quadrilaterals.
//!
//! Cells are stored counter-clockwise. Local edge `i` of a cell runs from
//! local vertex `i` to local vertex `i + 1` (cyclically). Global edges are
//! enumerated in order of first appearance while walking cells and their
//! local edges; a global edge is *oriented* from its lower to its higher
//! vertex index.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{FemError, MeshError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CellKind {
    Triangle,
    Quad,
}

impl CellKind {
    pub fn vertex_count(self) -> usize {
        match self {
            CellKind::Triangle => 3,
            CellKind::Quad => 4,
        }
    }

    /// Measure of the reference cell: the unit right triangle or `[0,1]²`.
    pub fn reference_measure(self) -> f64 {
        match self {
            CellKind::Triangle => 0.5,
            CellKind::Quad => 1.0,
        }
    }

    /// Reference vertex coordinates in local order.
    pub fn reference_vertices(self) -> &'static [[f64; 2]] {
        match self {
            CellKind::Triangle => &[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
            CellKind::Quad => &[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
        }
    }

    fn keyword(self) -> &'static str {
        match self {
            CellKind::Triangle => "tri",
            CellKind::Quad => "quad",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryEdge {
    pub attribute: i32,
    pub vertices: [usize; 2],
}

/// Jacobian data of the reference-to-physical map at one reference point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellGeometry {
    pub cell: usize,
    /// `jacobian[r][c] = d x_r / d xi_c`.
    pub jacobian: [[f64; 2]; 2],
    pub det: f64,
    /// Inverse transpose of the Jacobian, maps reference gradients to physical ones.
    pub inv_t: [[f64; 2]; 2],
}

impl CellGeometry {
    pub fn from_jacobian(cell: usize, jacobian: [[f64; 2]; 2]) -> Result<Self> {
        let [[a, b], [c, d]] = jacobian;
        let det = a * d - b * c;
        if !(det > 0.0) {
            return Err(FemError::DegenerateGeometry { cell, det });
        }
        let inv_t = [[d / det, -c / det], [-b / det, a / det]];
        Ok(Self { cell, jacobian, det, inv_t })
    }

    /// Physical gradient of a function whose reference gradient is `g`.
    #[inline]
    pub fn gradient(&self, g: [f64; 2]) -> [f64; 2] {
        let m = &self.inv_t;
        [m[0][0] * g[0] + m[0][1] * g[1], m[1][0] * g[0] + m[1][1] * g[1]]
    }

    /// Contravariant Piola transform `J v / det J`.
    #[inline]
    pub fn piola(&self, v: [f64; 2]) -> [f64; 2] {
        let j = &self.jacobian;
        [
            (j[0][0] * v[0] + j[0][1] * v[1]) / self.det,
            (j[1][0] * v[0] + j[1][1] * v[1]) / self.det,
        ]
    }

    /// Inverse Piola: the reference field whose transform is `v`.
    #[inline]
    pub fn inverse_piola(&self, v: [f64; 2]) -> [f64; 2] {
        // det J * J^{-1} v, with det J * J^{-1} = adj(J)
        let [[a, b], [c, d]] = self.jacobian;
        [d * v[0] - b * v[1], -c * v[0] + a * v[1]]
    }
}

#[derive(Debug, Clone)]
pub struct Mesh {
    vertices: Vec<[f64; 2]>,
    kind: CellKind,
    cells: Vec<usize>,
    boundary: Vec<BoundaryEdge>,
    edges: Vec<[usize; 2]>,
    cell_edges: Vec<usize>,
    edge_cells: Vec<(usize, Option<usize>)>,
    edge_lookup: HashMap<(usize, usize), usize>,
    boundary_edge_index: Vec<usize>,
}

/// Source line numbers, used only to annotate validation errors.
#[derive(Default)]
struct LineInfo {
    cells: Vec<usize>,
    boundary: Vec<usize>,
}

impl LineInfo {
    fn cell(&self, c: usize) -> usize {
        self.cells.get(c).copied().unwrap_or(0)
    }
    fn boundary(&self, b: usize) -> usize {
        self.boundary.get(b).copied().unwrap_or(0)
    }
}

impl Mesh {
    /// Builds and validates a mesh. `cells` holds one vertex tuple per cell.
    pub fn new(
        vertices: Vec<[f64; 2]>,
        kind: CellKind,
        cells: Vec<Vec<usize>>,
        boundary: Vec<BoundaryEdge>,
    ) -> std::result::Result<Self, MeshError> {
        let nv = kind.vertex_count();
        let mut flat = Vec::with_capacity(cells.len() * nv);
        for (c, cell) in cells.iter().enumerate() {
            if cell.len() != nv {
                return Err(MeshError::Syntax {
                    line: 0,
                    msg: format!("cell {c} has {} vertices, expected {nv}", cell.len()),
                });
            }
            flat.extend_from_slice(cell);
        }
        Self::build(vertices, kind, flat, boundary, &LineInfo::default())
    }

    fn build(
        vertices: Vec<[f64; 2]>,
        kind: CellKind,
        cells: Vec<usize>,
        boundary: Vec<BoundaryEdge>,
        lines: &LineInfo,
    ) -> std::result::Result<Self, MeshError> {
        let nv = kind.vertex_count();
        let ncells = cells.len() / nv;
        if ncells == 0 {
            return Err(MeshError::Empty);
        }
        for (c, cell) in cells.chunks(nv).enumerate() {
            for &v in cell {
                if v >= vertices.len() {
                    return Err(MeshError::IndexOutOfRange {
                        line: lines.cell(c),
                        index: v,
                        count: vertices.len(),
                    });
                }
            }
        }
        for (b, be) in boundary.iter().enumerate() {
            for &v in &be.vertices {
                if v >= vertices.len() {
                    return Err(MeshError::IndexOutOfRange {
                        line: lines.boundary(b),
                        index: v,
                        count: vertices.len(),
                    });
                }
            }
        }

        let mut mesh = Mesh {
            vertices,
            kind,
            cells,
            boundary,
            edges: Vec::new(),
            cell_edges: Vec::with_capacity(ncells * nv),
            edge_cells: Vec::new(),
            edge_lookup: HashMap::new(),
            boundary_edge_index: Vec::new(),
        };

        for c in 0..ncells {
            let area = mesh.min_corner_jacobian(c);
            if !(area > 0.0) {
                return Err(MeshError::Degenerate { line: lines.cell(c), area });
            }
        }

        for c in 0..ncells {
            for l in 0..nv {
                let a = mesh.cells[c * nv + l];
                let b = mesh.cells[c * nv + (l + 1) % nv];
                if a == b {
                    return Err(MeshError::Degenerate { line: lines.cell(c), area: 0.0 });
                }
                let key = (a.min(b), a.max(b));
                let e = match mesh.edge_lookup.get(&key) {
                    Some(&e) => {
                        let (first, second) = mesh.edge_cells[e];
                        if second.is_some() {
                            return Err(MeshError::Nonconforming {
                                line: lines.cell(c),
                                msg: format!("edge ({a}, {b}) is shared by more than two cells"),
                            });
                        }
                        // two CCW neighbours traverse a shared edge in opposite directions
                        let fl = (0..nv)
                            .find(|&fl| mesh.cells[first * nv + fl] == a)
                            .map(|fl| mesh.cells[first * nv + (fl + 1) % nv] == b)
                            .unwrap_or(false);
                        if fl {
                            return Err(MeshError::Nonconforming {
                                line: lines.cell(c),
                                msg: format!("edge ({a}, {b}) has inconsistent orientation"),
                            });
                        }
                        mesh.edge_cells[e].1 = Some(c);
                        e
                    }
                    None => {
                        let e = mesh.edges.len();
                        mesh.edges.push([key.0, key.1]);
                        mesh.edge_cells.push((c, None));
                        mesh.edge_lookup.insert(key, e);
                        e
                    }
                };
                mesh.cell_edges.push(e);
            }
        }

        let mut listed = vec![false; mesh.edges.len()];
        for (b, be) in mesh.boundary.iter().enumerate() {
            let [a, v] = be.vertices;
            let key = (a.min(v), a.max(v));
            let Some(&e) = mesh.edge_lookup.get(&key) else {
                return Err(MeshError::Nonconforming {
                    line: lines.boundary(b),
                    msg: format!("boundary edge ({a}, {v}) is not an edge of any cell"),
                });
            };
            if mesh.edge_cells[e].1.is_some() {
                return Err(MeshError::Nonconforming {
                    line: lines.boundary(b),
                    msg: format!("boundary edge ({a}, {v}) is shared by two cells"),
                });
            }
            if listed[e] {
                return Err(MeshError::Nonconforming {
                    line: lines.boundary(b),
                    msg: format!("boundary edge ({a}, {v}) listed twice"),
                });
            }
            if be.attribute < 1 {
                return Err(MeshError::Syntax {
                    line: lines.boundary(b),
                    msg: format!("boundary attribute {} must be >= 1", be.attribute),
                });
            }
            listed[e] = true;
            mesh.boundary_edge_index.push(e);
        }
        for (e, &(c, other)) in mesh.edge_cells.iter().enumerate() {
            if other.is_none() && !listed[e] {
                let [a, b] = mesh.edges[e];
                return Err(MeshError::Nonconforming {
                    line: lines.cell(c),
                    msg: format!("edge ({a}, {b}) belongs to one cell but is not a boundary edge"),
                });
            }
        }
        Ok(mesh)
    }

    /// Smallest Jacobian determinant over the cell corners. For triangles this
    /// is twice the signed area; for bilinear quads positivity at the corners
    /// implies positivity everywhere.
    fn min_corner_jacobian(&self, c: usize) -> f64 {
        self.kind
            .reference_vertices()
            .iter()
            .map(|&xi| {
                let [[a, b], [cc, d]] = self.jacobian(c, xi);
                a * d - b * cc
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn kind(&self) -> CellKind {
        self.kind
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len() / self.kind.vertex_count()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn cell(&self, c: usize) -> &[usize] {
        let nv = self.kind.vertex_count();
        &self.cells[c * nv..(c + 1) * nv]
    }

    pub fn cells(&self) -> impl Iterator<Item = &[usize]> {
        self.cells.chunks(self.kind.vertex_count())
    }

    pub fn boundary(&self) -> &[BoundaryEdge] {
        &self.boundary
    }

    /// Global edge index of boundary entry `b`.
    pub fn boundary_edge(&self, b: usize) -> usize {
        self.boundary_edge_index[b]
    }

    /// Sorted distinct boundary attributes.
    pub fn boundary_attributes(&self) -> Vec<i32> {
        let mut attrs: Vec<i32> = self.boundary.iter().map(|b| b.attribute).collect();
        attrs.sort_unstable();
        attrs.dedup();
        attrs
    }

    /// Endpoints of global edge `e`, lower vertex index first.
    pub fn edge(&self, e: usize) -> [usize; 2] {
        self.edges[e]
    }

    /// Cells adjacent to edge `e`.
    pub fn edge_cells(&self, e: usize) -> (usize, Option<usize>) {
        self.edge_cells[e]
    }

    /// Global edge index of local edge `l` of cell `c`, and whether the local
    /// direction agrees with the global low-to-high orientation.
    pub fn cell_edge(&self, c: usize, l: usize) -> (usize, bool) {
        let nv = self.kind.vertex_count();
        let a = self.cells[c * nv + l];
        let b = self.cells[c * nv + (l + 1) % nv];
        (self.cell_edges[c * nv + l], a < b)
    }

    /// Local edge index of global edge `e` within cell `c`.
    pub fn local_edge(&self, c: usize, e: usize) -> Option<usize> {
        let nv = self.kind.vertex_count();
        (0..nv).find(|&l| self.cell_edges[c * nv + l] == e)
    }

    fn corner(&self, c: usize, l: usize) -> [f64; 2] {
        self.vertices[self.cells[c * self.kind.vertex_count() + l]]
    }

    /// Reference-to-physical map of cell `c`.
    pub fn map_point(&self, c: usize, xi: [f64; 2]) -> [f64; 2] {
        match self.kind {
            CellKind::Triangle => {
                let (p0, p1, p2) = (self.corner(c, 0), self.corner(c, 1), self.corner(c, 2));
                [
                    p0[0] + (p1[0] - p0[0]) * xi[0] + (p2[0] - p0[0]) * xi[1],
                    p0[1] + (p1[1] - p0[1]) * xi[0] + (p2[1] - p0[1]) * xi[1],
                ]
            }
            CellKind::Quad => {
                let [s, t] = xi;
                let w = [(1.0 - s) * (1.0 - t), s * (1.0 - t), s * t, (1.0 - s) * t];
                let mut x = [0.0; 2];
                for (l, wl) in w.iter().enumerate() {
                    let p = self.corner(c, l);
                    x[0] += wl * p[0];
                    x[1] += wl * p[1];
                }
                x
            }
        }
    }

    fn jacobian(&self, c: usize, xi: [f64; 2]) -> [[f64; 2]; 2] {
        match self.kind {
            CellKind::Triangle => {
                let (p0, p1, p2) = (self.corner(c, 0), self.corner(c, 1), self.corner(c, 2));
                [[p1[0] - p0[0], p2[0] - p0[0]], [p1[1] - p0[1], p2[1] - p0[1]]]
            }
            CellKind::Quad => {
                let [s, t] = xi;
                let ds = [-(1.0 - t), 1.0 - t, t, -t];
                let dt = [-(1.0 - s), -s, s, 1.0 - s];
                let mut j = [[0.0; 2]; 2];
                for l in 0..4 {
                    let p = self.corner(c, l);
                    for r in 0..2 {
                        j[r][0] += ds[l] * p[r];
                        j[r][1] += dt[l] * p[r];
                    }
                }
                j
            }
        }
    }

    /// Jacobian, determinant and inverse transpose at reference point `xi`.
    pub fn cell_geometry(&self, c: usize, xi: [f64; 2]) -> Result<CellGeometry> {
        CellGeometry::from_jacobian(c, self.jacobian(c, xi))
    }

    /// Longest side (triangles) or diameter including diagonals (quads).
    pub fn cell_diameter(&self, c: usize) -> f64 {
        let pts: Vec<[f64; 2]> = self.cell(c).iter().map(|&v| self.vertices[v]).collect();
        let mut d: f64 = 0.0;
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                d = d.max((pts[i][0] - pts[j][0]).hypot(pts[i][1] - pts[j][1]));
            }
        }
        d
    }

    /// `h = max diam(K)`.
    pub fn h(&self) -> f64 {
        (0..self.num_cells()).map(|c| self.cell_diameter(c)).fold(0.0, f64::max)
    }

    /// Total area, integrated with the exact rule for the cell map.
    pub fn area(&self) -> f64 {
        (0..self.num_cells())
            .map(|c| match self.kind {
                CellKind::Triangle => 0.5 * self.min_corner_jacobian(c),
                CellKind::Quad => {
                    // det J is bilinear in (s, t); the 2x2 Gauss rule is exact
                    let g = 0.5 / 3f64.sqrt();
                    [0.5 - g, 0.5 + g]
                        .iter()
                        .flat_map(|&s| [0.5 - g, 0.5 + g].map(|t| [s, t]))
                        .map(|xi| {
                            let [[a, b], [cc, d]] = self.jacobian(c, xi);
                            0.25 * (a * d - b * cc)
                        })
                        .sum::<f64>()
                }
            })
            .sum()
    }

    /// Splits every cell into four through edge midpoints (and the centroid for
    /// quads). New vertices: old vertices, then one per edge in edge order, then
    /// one per quad in cell order.
    pub fn uniform_refine(&self) -> Mesh {
        let nv = self.num_vertices();
        let ne = self.num_edges();
        let mut vertices = self.vertices.clone();
        for &[a, b] in &self.edges {
            let (pa, pb) = (self.vertices[a], self.vertices[b]);
            vertices.push([0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]);
        }
        let mid = |c: usize, l: usize| nv + self.cell_edges[c * self.kind.vertex_count() + l];
        let mut cells = Vec::with_capacity(self.cells.len() * 4);
        match self.kind {
            CellKind::Triangle => {
                for c in 0..self.num_cells() {
                    let v = self.cell(c);
                    let (m01, m12, m20) = (mid(c, 0), mid(c, 1), mid(c, 2));
                    cells.extend_from_slice(&[v[0], m01, m20]);
                    cells.extend_from_slice(&[m01, v[1], m12]);
                    cells.extend_from_slice(&[m20, m12, v[2]]);
                    cells.extend_from_slice(&[m01, m12, m20]);
                }
            }
            CellKind::Quad => {
                for c in 0..self.num_cells() {
                    let v = self.cell(c);
                    let center = self.map_point(c, [0.5, 0.5]);
                    let cc = vertices.len();
                    vertices.push(center);
                    let (m01, m12, m23, m30) = (mid(c, 0), mid(c, 1), mid(c, 2), mid(c, 3));
                    cells.extend_from_slice(&[v[0], m01, cc, m30]);
                    cells.extend_from_slice(&[m01, v[1], m12, cc]);
                    cells.extend_from_slice(&[cc, m12, v[2], m23]);
                    cells.extend_from_slice(&[m30, cc, m23, v[3]]);
                }
            }
        }
        debug_assert!(vertices.len() >= nv + ne);
        let mut boundary = Vec::with_capacity(self.boundary.len() * 2);
        for (b, be) in self.boundary.iter().enumerate() {
            let m = nv + self.boundary_edge_index[b];
            let [a, v] = be.vertices;
            boundary.push(BoundaryEdge { attribute: be.attribute, vertices: [a, m] });
            boundary.push(BoundaryEdge { attribute: be.attribute, vertices: [m, v] });
        }
        Mesh::build(vertices, self.kind, cells, boundary, &LineInfo::default())
            .expect("refinement of a valid mesh is valid")
    }

    /// Refines `levels` times.
    pub fn refined(&self, levels: usize) -> Mesh {
        let mut m = self.clone();
        for _ in 0..levels {
            m = m.uniform_refine();
        }
        m
    }

    /// Parses the femmesh ASCII format.
    pub fn parse(text: &str) -> std::result::Result<Mesh, MeshError> {
        parse_femmesh(text)
    }

    /// Serializes to femmesh. Coordinates use the shortest representation that
    /// parses back to the identical `f64`.
    pub fn to_femmesh(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "femmesh 1\ndim 2");
        let _ = writeln!(s, "vertices {}", self.vertices.len());
        for p in &self.vertices {
            let _ = writeln!(s, "{:?} {:?}", p[0], p[1]);
        }
        let _ = writeln!(s, "cells {} {}", self.num_cells(), self.kind.keyword());
        for cell in self.cells() {
            let row: Vec<String> = cell.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(s, "{}", row.join(" "));
        }
        let _ = writeln!(s, "boundary {}", self.boundary.len());
        for b in &self.boundary {
            let _ = writeln!(s, "{} {} {}", b.attribute, b.vertices[0], b.vertices[1]);
        }
        s
    }

    /// `[x0,x1] x [y0,y1]` split into `nx * ny` quads. Boundary attributes:
    /// 1 bottom, 2 right, 3 top, 4 left.
    pub fn rectangle_quads(x: [f64; 2], y: [f64; 2], nx: usize, ny: usize) -> Mesh {
        let (vertices, boundary) = grid_vertices(x, y, nx, ny);
        let id = |i: usize, j: usize| j * (nx + 1) + i;
        let mut cells = Vec::with_capacity(nx * ny * 4);
        for j in 0..ny {
            for i in 0..nx {
                cells.extend_from_slice(&[id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
            }
        }
        Mesh::build(vertices, CellKind::Quad, cells, boundary, &LineInfo::default())
            .expect("structured grid is valid")
    }

    /// Same grid as [`Mesh::rectangle_quads`] with each square cut along the
    /// diagonal from its lower-left to its upper-right corner.
    pub fn rectangle_triangles(x: [f64; 2], y: [f64; 2], nx: usize, ny: usize) -> Mesh {
        let (vertices, boundary) = grid_vertices(x, y, nx, ny);
        let id = |i: usize, j: usize| j * (nx + 1) + i;
        let mut cells = Vec::with_capacity(nx * ny * 6);
        for j in 0..ny {
            for i in 0..nx {
                cells.extend_from_slice(&[id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
                cells.extend_from_slice(&[id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
            }
        }
        Mesh::build(vertices, CellKind::Triangle, cells, boundary, &LineInfo::default())
            .expect("structured grid is valid")
    }

    /// The unit square as two triangles sharing the diagonal (0,0)-(1,1).
    pub fn unit_square_triangles() -> Mesh {
        Self::rectangle_triangles([0.0, 1.0], [0.0, 1.0], 1, 1)
    }

    /// Five-pointed star of five kite quads around the origin: tips at
    /// radius 1, notches at radius 1/2. Boundary attribute 1.
    pub fn star() -> Mesh {
        let (vertices, cells, boundary) = star_parts();
        let cells = cells.iter().map(|&[c, a, t, b]| vec![c, a, t, b]).collect();
        Self::new(vertices, CellKind::Quad, cells, boundary).expect("star kites are convex")
    }

    /// [`Mesh::star`] with every kite split along its center-tip diagonal.
    pub fn star_triangles() -> Mesh {
        let (vertices, cells, boundary) = star_parts();
        let cells = cells.iter().flat_map(|&[c, a, t, b]| [vec![c, a, t], vec![c, t, b]]).collect();
        Self::new(vertices, CellKind::Triangle, cells, boundary).expect("star triangles are valid")
    }
}

type StarParts = (Vec<[f64; 2]>, Vec<[usize; 4]>, Vec<BoundaryEdge>);

// vertex 0 is the center, 1..=5 the tips, 6..=10 the notches
fn star_parts() -> StarParts {
    use std::f64::consts::PI;
    let mut vertices = vec![[0.0, 0.0]];
    let at = |r: f64, deg: f64| [r * (deg * PI / 180.0).cos(), r * (deg * PI / 180.0).sin()];
    for i in 0..5 {
        vertices.push(at(1.0, 90.0 + 72.0 * i as f64));
    }
    for i in 0..5 {
        vertices.push(at(0.5, 126.0 + 72.0 * i as f64));
    }
    let mut cells = Vec::new();
    let mut boundary = Vec::new();
    for i in 0..5 {
        let (tip, before, after) = (1 + i, 6 + (i + 4) % 5, 6 + i);
        cells.push([0, before, tip, after]);
        boundary.push(BoundaryEdge { attribute: 1, vertices: [before, tip] });
        boundary.push(BoundaryEdge { attribute: 1, vertices: [tip, after] });
    }
    (vertices, cells, boundary)
}

fn grid_vertices(x: [f64; 2], y: [f64; 2], nx: usize, ny: usize) -> (Vec<[f64; 2]>, Vec<BoundaryEdge>) {
    assert!(nx > 0 && ny > 0, "grid needs at least one cell per direction");
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        let yj = if j == ny { y[1] } else { y[0] + (y[1] - y[0]) * j as f64 / ny as f64 };
        for i in 0..=nx {
            let xi = if i == nx { x[1] } else { x[0] + (x[1] - x[0]) * i as f64 / nx as f64 };
            vertices.push([xi, yj]);
        }
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut boundary = Vec::with_capacity(2 * (nx + ny));
    for i in 0..nx {
        boundary.push(BoundaryEdge { attribute: 1, vertices: [id(i, 0), id(i + 1, 0)] });
    }
    for j in 0..ny {
        boundary.push(BoundaryEdge { attribute: 2, vertices: [id(nx, j), id(nx, j + 1)] });
    }
    for i in (0..nx).rev() {
        boundary.push(BoundaryEdge { attribute: 3, vertices: [id(i + 1, ny), id(i, ny)] });
    }
    for j in (0..ny).rev() {
        boundary.push(BoundaryEdge { attribute: 4, vertices: [id(0, j + 1), id(0, j)] });
    }
    (vertices, boundary)
}

struct Tokens<'a> {
    items: Vec<(usize, &'a str)>,
    pos: usize,
    last_line: usize,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        let mut items = Vec::new();
        let mut last_line = 1;
        for (i, line) in text.lines().enumerate() {
            let content = line.split('#').next().unwrap_or("");
            for tok in content.split_whitespace() {
                items.push((i + 1, tok));
            }
            last_line = i + 1;
        }
        Tokens { items, pos: 0, last_line }
    }

    fn next(&mut self, what: &str) -> std::result::Result<(usize, &'a str), MeshError> {
        let t = self.items.get(self.pos).copied().ok_or_else(|| MeshError::Syntax {
            line: self.last_line,
            msg: format!("unexpected end of file, expected {what}"),
        })?;
        self.pos += 1;
        Ok(t)
    }

    fn keyword(&mut self, kw: &str) -> std::result::Result<usize, MeshError> {
        let (line, t) = self.next(kw)?;
        if t != kw {
            return Err(MeshError::Header { line, msg: format!("expected '{kw}', found '{t}'") });
        }
        Ok(line)
    }

    fn parse<T: std::str::FromStr>(&mut self, what: &str) -> std::result::Result<(usize, T), MeshError> {
        let (line, t) = self.next(what)?;
        t.parse::<T>()
            .map(|v| (line, v))
            .map_err(|_| MeshError::Syntax { line, msg: format!("invalid {what} '{t}'") })
    }
}

fn parse_femmesh(text: &str) -> std::result::Result<Mesh, MeshError> {
    let mut tok = Tokens::new(text);
    tok.keyword("femmesh")?;
    let (line, version) = tok.parse::<u32>("format version")?;
    if version != 1 {
        return Err(MeshError::Header { line, msg: format!("unsupported version {version}") });
    }
    tok.keyword("dim")?;
    let (line, dim) = tok.parse::<u32>("dimension")?;
    if dim != 2 {
        return Err(MeshError::Header { line, msg: format!("unsupported dimension {dim}") });
    }
    tok.keyword("vertices")?;
    let (_, nverts) = tok.parse::<usize>("vertex count")?;
    let mut vertices = Vec::with_capacity(nverts);
    for _ in 0..nverts {
        let (_, x) = tok.parse::<f64>("coordinate")?;
        let (_, y) = tok.parse::<f64>("coordinate")?;
        vertices.push([x, y]);
    }
    tok.keyword("cells")?;
    let (_, ncells) = tok.parse::<usize>("cell count")?;
    let (line, kind) = tok.next("cell kind")?;
    let kind = match kind {
        "tri" => CellKind::Triangle,
        "quad" => CellKind::Quad,
        other => {
            return Err(MeshError::Header { line, msg: format!("unknown cell kind '{other}'") })
        }
    };
    let mut cells = Vec::with_capacity(ncells * kind.vertex_count());
    let mut lines = LineInfo::default();
    for _ in 0..ncells {
        let mut first = 0;
        for k in 0..kind.vertex_count() {
            let (line, v) = tok.parse::<usize>("vertex index")?;
            if k == 0 {
                first = line;
            }
            cells.push(v);
        }
        lines.cells.push(first);
    }
    tok.keyword("boundary")?;
    let (_, nb) = tok.parse::<usize>("boundary count")?;
    let mut boundary = Vec::with_capacity(nb);
    for _ in 0..nb {
        let (line, attribute) = tok.parse::<i32>("boundary attribute")?;
        let (_, a) = tok.parse::<usize>("vertex index")?;
        let (_, b) = tok.parse::<usize>("vertex index")?;
        boundary.push(BoundaryEdge { attribute, vertices: [a, b] });
        lines.boundary.push(line);
    }
    if let Some(&(line, t)) = tok.items.get(tok.pos) {
        return Err(MeshError::Syntax { line, msg: format!("trailing token '{t}'") });
    }
    Mesh::build(vertices, kind, cells, boundary, &lines)
}

#[cfg(test)]
mod tests {
    use super::*;

    const UNIT_TRIANGLE: &str = "\
femmesh 1
dim 2
vertices 3
0 0
1 0
0 1
cells 1 tri
0 1 2
boundary 3
1 0 1
1 1 2
1 2 0
";

    const UNIT_SQUARE: &str = "\
femmesh 1   # two triangles
dim 2
vertices 4
0 0
1 0
1 1
0 1
cells 2 tri
0 1 2
0 2 3
boundary 4
1 0 1
2 1 2
3 2 3
4 3 0
";

    #[test]
    fn parses_single_triangle() {
        let m = Mesh::parse(UNIT_TRIANGLE).unwrap();
        assert_eq!(m.num_vertices(), 3);
        assert_eq!(m.num_cells(), 1);
        assert_eq!(m.num_edges(), 3);
    }

    #[test]
    fn square_diagonal_is_shared() {
        let m = Mesh::parse(UNIT_SQUARE).unwrap();
        assert_eq!(m.num_edges(), 5);
        let diag = (0..m.num_edges()).find(|&e| m.edge(e) == [0, 2]).unwrap();
        assert_eq!(m.edge_cells(diag), (0, Some(1)));
    }

    #[test]
    fn reports_out_of_range_index_with_line() {
        let bad = UNIT_SQUARE.replace("0 2 3\n", "0 2 9\n");
        let err = Mesh::parse(&bad).unwrap_err();
        assert_eq!(err, MeshError::IndexOutOfRange { line: 10, index: 9, count: 4 });
        assert!(err.to_string().contains("index out of range, line 10"));
    }

    #[test]
    fn rejects_clockwise_cell() {
        let bad = UNIT_TRIANGLE.replace("0 1 2\n", "0 2 1\n");
        assert!(matches!(Mesh::parse(&bad), Err(MeshError::Degenerate { line: 8, .. })));
    }

    #[test]
    fn rejects_bad_header() {
        assert!(matches!(Mesh::parse("femesh 1"), Err(MeshError::Header { line: 1, .. })));
        let bad = UNIT_TRIANGLE.replace("dim 2", "dim 3");
        assert!(matches!(Mesh::parse(&bad), Err(MeshError::Header { line: 2, .. })));
    }

    #[test]
    fn rejects_hanging_node() {
        // vertex 3 sits on the interior of edge (1,2) of cell 0
        let text = "\
femmesh 1
dim 2
vertices 6
0 0
1 0
1 1
1 0.5
2 0
2 1
cells 4 tri
0 1 2
1 4 3
3 4 5
3 5 2
boundary 5
1 0 1
1 1 4
1 4 5
1 5 2
1 2 0
";
        let err = Mesh::parse(text).unwrap_err();
        assert!(matches!(err, MeshError::Nonconforming { .. }), "{err:?}");
    }

    #[test]
    fn rejects_missing_boundary_edge() {
        let bad = UNIT_TRIANGLE.replace("boundary 3", "boundary 2").replace("1 2 0\n", "");
        assert!(matches!(Mesh::parse(&bad), Err(MeshError::Nonconforming { .. })));
    }

    #[test]
    fn refine_counts() {
        let tri = Mesh::parse(UNIT_TRIANGLE).unwrap().uniform_refine();
        assert_eq!((tri.num_cells(), tri.num_vertices()), (4, 6));
        let sq = Mesh::parse(UNIT_SQUARE).unwrap().uniform_refine();
        assert_eq!((sq.num_cells(), sq.num_vertices()), (8, 9));
        assert_eq!(sq.boundary().len(), 8);
    }

    #[test]
    fn h_of_unit_triangle() {
        let m = Mesh::parse(UNIT_TRIANGLE).unwrap();
        assert!((m.h() - 2f64.sqrt()).abs() < 1e-15);
        assert!((m.uniform_refine().h() - 2f64.sqrt() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn quad_diameter_uses_diagonal() {
        let m = Mesh::rectangle_quads([0.0, 1.0], [0.0, 1.0], 1, 1);
        assert!((m.h() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn geometry_examples() {
        let m = Mesh::parse(UNIT_TRIANGLE).unwrap();
        let g = m.cell_geometry(0, [0.2, 0.3]).unwrap();
        assert_eq!(g.jacobian, [[1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(g.det, 1.0);

        let scaled = Mesh::parse(&UNIT_TRIANGLE.replace("1 0\n0 1\n", "2 0\n0 2\n")).unwrap();
        assert_eq!(scaled.cell_geometry(0, [0.1, 0.1]).unwrap().det, 4.0);

        let q = Mesh::rectangle_quads([0.0, 1.0], [0.0, 1.0], 1, 1);
        let g = q.cell_geometry(0, [0.5, 0.5]).unwrap();
        assert_eq!(g.jacobian, [[1.0, 0.0], [0.0, 1.0]]);
    }

    #[test]
    fn refinement_preserves_area_and_attributes() {
        let meshes = [
            Mesh::parse(UNIT_SQUARE).unwrap(),
            Mesh::rectangle_quads([-0.5, 1.0], [-0.5, 1.5], 3, 4),
        ];
        for m in meshes {
            let r = m.refined(2);
            assert!((r.area() - m.area()).abs() <= 1e-12 * m.area());
            let count = |mesh: &Mesh, a: i32| mesh.boundary().iter().filter(|b| b.attribute == a).count();
            for a in m.boundary_attributes() {
                assert_eq!(count(&r, a), 4 * count(&m, a));
            }
        }
    }

    #[test]
    fn round_trip_is_identity() {
        let m = Mesh::rectangle_triangles([-0.5, 1.0], [0.1, 0.7], 3, 7).uniform_refine();
        let back = Mesh::parse(&m.to_femmesh()).unwrap();
        assert_eq!(back.vertices(), m.vertices());
        assert!(back.cells().eq(m.cells()));
        assert_eq!(back.boundary(), m.boundary());
    }
}
