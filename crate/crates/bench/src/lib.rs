//! Benchmark-only crate; the benchmarks live in `benches/`.

use std::sync::Arc;

use fem2d::Mesh;

/// The 2-triangle unit square refined `levels` times.
pub fn square(levels: usize) -> Arc<Mesh> {
    Arc::new(Mesh::unit_square_triangles().refined(levels))
}
