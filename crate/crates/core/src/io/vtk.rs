//! Legacy ASCII VTK output. Fields are sampled at mesh vertices by averaging
//! the values from every incident cell.

use std::fmt::Write as _;
use std::path::Path;

use super::write_atomic;
use crate::error::{FemError, Result};
use crate::mesh::{CellKind, Mesh};
use crate::spaces::CellFunction;

/// Vertex values of `f`: `components()` numbers per vertex.
pub fn sample_at_vertices(mesh: &Mesh, f: &dyn CellFunction) -> Vec<Vec<f64>> {
    let nc = f.components();
    let mut sum = vec![vec![0.0; nc]; mesh.num_vertices()];
    let mut count = vec![0usize; mesh.num_vertices()];
    let refs = mesh.kind().reference_vertices();
    let mut buf = [0.0; 2];
    for c in 0..mesh.num_cells() {
        for (&v, &xi) in mesh.cell(c).iter().zip(refs) {
            f.eval(mesh, c, xi, &mut buf);
            sum[v].iter_mut().zip(&buf).for_each(|(s, b)| *s += b);
            count[v] += 1;
        }
    }
    for (s, &n) in sum.iter_mut().zip(&count) {
        s.iter_mut().for_each(|x| *x /= n.max(1) as f64);
    }
    sum
}

/// Renders the mesh and named point fields. One-component fields become
/// `SCALARS`, two-component fields `VECTORS` with a zero z component.
pub fn format_vtk(mesh: &Mesh, fields: &[(&str, &dyn CellFunction)]) -> Result<String> {
    let mut s = String::new();
    let _ = writeln!(s, "# vtk DataFile Version 3.0\nfem2d output\nASCII\nDATASET UNSTRUCTURED_GRID");
    let _ = writeln!(s, "POINTS {} double", mesh.num_vertices());
    for p in mesh.vertices() {
        let _ = writeln!(s, "{:?} {:?} 0", p[0], p[1]);
    }
    let nv = mesh.kind().vertex_count();
    let _ = writeln!(s, "CELLS {} {}", mesh.num_cells(), mesh.num_cells() * (nv + 1));
    for cell in mesh.cells() {
        let ids: Vec<String> = cell.iter().map(usize::to_string).collect();
        let _ = writeln!(s, "{nv} {}", ids.join(" "));
    }
    let ctype = match mesh.kind() {
        CellKind::Triangle => 5,
        CellKind::Quad => 9,
    };
    let _ = writeln!(s, "CELL_TYPES {}", mesh.num_cells());
    for _ in 0..mesh.num_cells() {
        let _ = writeln!(s, "{ctype}");
    }
    if !fields.is_empty() {
        let _ = writeln!(s, "POINT_DATA {}", mesh.num_vertices());
    }
    for (name, f) in fields {
        if name.is_empty() || name.contains(char::is_whitespace) {
            return Err(FemError::InvalidArgument(format!("invalid VTK field name '{name}'")));
        }
        let values = sample_at_vertices(mesh, *f);
        match f.components() {
            1 => {
                let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
                for v in &values {
                    let _ = writeln!(s, "{:?}", v[0]);
                }
            }
            2 => {
                let _ = writeln!(s, "VECTORS {name} double");
                for v in &values {
                    let _ = writeln!(s, "{:?} {:?} 0", v[0], v[1]);
                }
            }
            n => return Err(FemError::InvalidArgument(format!("field '{name}' has {n} components"))),
        }
    }
    Ok(s)
}

pub fn write_vtk(path: &Path, mesh: &Mesh, fields: &[(&str, &dyn CellFunction)]) -> Result<()> {
    write_atomic(path, &format_vtk(mesh, fields)?)
}
