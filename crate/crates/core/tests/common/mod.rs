#![allow(dead_code)]

pub mod oracle;

use std::sync::Arc;

use fem2d::mesh::Mesh;

/// `mesh` with every vertex sent through `f` (which must keep cells
/// counterclockwise).
pub fn mapped(mesh: &Mesh, f: impl Fn([f64; 2]) -> [f64; 2]) -> Arc<Mesh> {
    let vertices = mesh.vertices().iter().map(|&p| f(p)).collect();
    let cells = mesh.cells().map(<[usize]>::to_vec).collect();
    Arc::new(Mesh::new(vertices, mesh.kind(), cells, mesh.boundary().to_vec()).expect("valid mapped mesh"))
}

/// Shear plus scaling: keeps quads parallelograms.
pub fn affine(p: [f64; 2]) -> [f64; 2] {
    [1.3 * p[0] + 0.4 * p[1] - 0.2, -0.1 * p[0] + 0.9 * p[1] + 0.5]
}

/// Triangles with interior vertices moved off the grid.
pub fn perturbed_triangles(levels: usize) -> Arc<Mesh> {
    let m = Mesh::unit_square_triangles().refined(levels);
    mapped(&m, |p| {
        let bubble = p[0] * (1.0 - p[0]) * p[1] * (1.0 - p[1]);
        [p[0] + 0.6 * bubble * (7.0 * p[1]).sin(), p[1] + 0.5 * bubble * (5.0 * p[0]).cos()]
    })
}

pub fn dense_max(a: &[Vec<f64>]) -> f64 {
    a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Reference coordinates on cell `c` of the point at parameter `t` along
/// global edge `e` (measured from its first vertex).
pub fn edge_point(mesh: &Mesh, c: usize, e: usize, t: f64) -> [f64; 2] {
    let l = mesh.local_edge(c, e).unwrap();
    let cell = mesh.cell(c);
    let nv = cell.len();
    let r = mesh.kind().reference_vertices();
    let (r0, r1) = (r[l], r[(l + 1) % nv]);
    let t = if cell[l] == mesh.edge(e)[0] { t } else { 1.0 - t };
    [r0[0] + t * (r1[0] - r0[0]), r0[1] + t * (r1[1] - r0[1])]
}

/// `(edge, cell0, cell1)` for every edge shared by two cells.
pub fn interior_edges(mesh: &Mesh) -> Vec<(usize, usize, usize)> {
    (0..mesh.num_edges()).filter_map(|e| mesh.edge_cells(e).1.map(|c1| (e, mesh.edge_cells(e).0, c1))).collect()
}
