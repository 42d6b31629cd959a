//! Every bilinear form against the brute-force oracle.

mod common;

use std::sync::Arc;

use common::oracle::{bilinear_error, convection_error};
use common::{affine, mapped, perturbed_triangles};
use fem2d::assembly::{assemble_bilinear, BilinearKind};
use fem2d::mesh::{CellKind, Mesh};
use fem2d::spaces::Space;
use fem2d::ElementFamily;

fn check(kind: BilinearKind, trial: &Arc<Space>, test: &Arc<Space>) {
    let err = bilinear_error(kind, trial, test);
    assert!(err <= 1e-12, "{kind:?} {:?}/{:?}: {err}", trial.family(), test.family());
}

fn meshes() -> Vec<Arc<Mesh>> {
    vec![
        perturbed_triangles(1),                                                   // 8 triangles
        mapped(&Mesh::rectangle_quads([0.0, 1.0], [0.0, 1.0], 2, 2), affine),     // 4 parallelograms
        mapped(&Mesh::rectangle_quads([0.0, 2.0], [0.0, 1.0], 4, 2), affine),     // 8 parallelograms
    ]
}

fn space(mesh: &Arc<Mesh>, family: ElementFamily, vdim: usize) -> Arc<Space> {
    Space::new(mesh.clone(), family, vdim).unwrap()
}

#[test]
fn scalar_forms() {
    for m in meshes() {
        assert!(m.num_cells() <= 8);
        let kind = m.kind();
        for k in 1..=3 {
            let s = space(&m, ElementFamily::lagrange(kind, k), 1);
            check(BilinearKind::Diffusion, &s, &s);
            check(BilinearKind::Mass, &s, &s);
            let dg = space(&m, ElementFamily::discontinuous(kind, k - 1), 1);
            check(BilinearKind::Mass, &s, &dg);
            check(BilinearKind::Mass, &dg, &dg);
        }
    }
}

#[test]
fn vector_lagrange_forms() {
    for m in meshes() {
        let kind = m.kind();
        for k in 2..=3 {
            let u = space(&m, ElementFamily::lagrange(kind, k), 2);
            let p = space(&m, ElementFamily::lagrange(kind, k - 1), 1);
            check(BilinearKind::VectorDiffusion, &u, &u);
            check(BilinearKind::Mass, &u, &u);
            check(BilinearKind::VelocityDivergence, &u, &p);
            check(BilinearKind::GradPressure, &p, &u);
        }
    }
}

#[test]
fn raviart_thomas_forms() {
    let m = perturbed_triangles(1);
    for k in 0..=1 {
        let rt = space(&m, ElementFamily::raviart_thomas(k), 1);
        let dg = space(&m, ElementFamily::discontinuous(CellKind::Triangle, k), 1);
        check(BilinearKind::VectorFEMass, &rt, &rt);
        check(BilinearKind::VectorFEDivergence, &rt, &dg);
    }
}

#[test]
fn convection_matches_pointwise_nonlinear_term() {
    // C(u) u against N(u)_I = int ((u . grad) u) . phi_I on single cells
    let cells = [
        Arc::new(Mesh::rectangle_quads([0.0, 1.0], [0.0, 1.0], 1, 1)),
        mapped(&Mesh::rectangle_quads([0.0, 1.0], [0.0, 1.0], 1, 1), affine),
        mapped(&Mesh::rectangle_triangles([0.0, 1.0], [0.0, 1.0], 1, 1), affine),
    ];
    for m in cells {
        for k in 2..=3 {
            let err = convection_error(&m, k);
            assert!(err <= 1e-12, "{err}");
        }
    }
}

#[test]
fn linear_in_coefficient() {
    let m = perturbed_triangles(1);
    let s = space(&m, ElementFamily::lagrange(CellKind::Triangle, 2), 1);
    let a1 = assemble_bilinear(BilinearKind::Diffusion, &s, &s, 1.0).unwrap();
    let a3 = assemble_bilinear(BilinearKind::Diffusion, &s, &s, -3.0).unwrap();
    for (x, y) in a1.values().iter().zip(a3.values()) {
        assert!((3.0 * x + y).abs() <= 1e-13 * x.abs().max(1.0));
    }
}
