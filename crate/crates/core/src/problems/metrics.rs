//! L2 norms, errors and projections evaluated cell by cell.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::elements::ElementFamily;
use crate::error::{FemError, Result};
use crate::mesh::Mesh;
use crate::quadrature::{gauss_rule, Geometry};
use crate::spaces::{CellFunction, Field, ScalarFn, Space};

/// `sqrt(sum_cells int |a - b|^2)` with a rule of the given degree.
pub fn l2_error(a: &dyn CellFunction, b: &dyn CellFunction, mesh: &Mesh, degree: usize) -> Result<f64> {
    let n = a.components();
    if b.components() != n {
        return Err(FemError::DimensionMismatch { expected: n, got: b.components() });
    }
    let rule = gauss_rule(Geometry::from(mesh.kind()), degree)?;
    let (mut va, mut vb) = ([0.0; 2], [0.0; 2]);
    let mut sum = 0.0;
    for c in 0..mesh.num_cells() {
        for (p, w) in rule.iter() {
            let det = mesh.cell_geometry(c, p)?.det;
            a.eval(mesh, c, p, &mut va);
            b.eval(mesh, c, p, &mut vb);
            sum += w * det * (0..n).map(|i| (va[i] - vb[i]).powi(2)).sum::<f64>();
        }
    }
    Ok(sum.sqrt())
}

/// `sqrt(int |a|^2)`.
pub fn l2_norm(a: &dyn CellFunction, mesh: &Mesh, degree: usize) -> Result<f64> {
    let zero: Box<dyn CellFunction> = match a.components() {
        1 => Box::new(ScalarFn(|_| 0.0)),
        _ => Box::new(crate::spaces::VectorFn(|_| [0.0, 0.0])),
    };
    l2_error(a, zero.as_ref(), mesh, degree)
}

/// Domain average of a scalar function.
pub fn mean_value(a: &dyn CellFunction, mesh: &Mesh, degree: usize) -> Result<f64> {
    let rule = gauss_rule(Geometry::from(mesh.kind()), degree)?;
    let (mut integral, mut area) = (0.0, 0.0);
    let mut v = [0.0; 2];
    for c in 0..mesh.num_cells() {
        for (p, w) in rule.iter() {
            let det = mesh.cell_geometry(c, p)?.det;
            a.eval(mesh, c, p, &mut v);
            integral += w * det * v[0];
            area += w * det;
        }
    }
    Ok(integral / area)
}

/// L2 distance between two scalar functions after removing each one's mean.
pub fn l2_error_zero_mean(a: &dyn CellFunction, b: &dyn CellFunction, mesh: &Mesh, degree: usize) -> Result<f64> {
    let (ma, mb) = (mean_value(a, mesh, degree)?, mean_value(b, mesh, degree)?);
    let shifted = CellFn(1, |m: &Mesh, c, xi, out: &mut [f64]| {
        let mut t = [0.0; 2];
        a.eval(m, c, xi, &mut t);
        out[0] = t[0] - ma;
    });
    let target = CellFn(1, |m: &Mesh, c, xi, out: &mut [f64]| {
        let mut t = [0.0; 2];
        b.eval(m, c, xi, &mut t);
        out[0] = t[0] - mb;
    });
    l2_error(&shifted, &target, mesh, degree)
}

/// Composite velocity error `sqrt(ex^2 + ey^2) / norm`.
pub fn u_error(err_x: f64, err_y: f64, norm: f64) -> f64 {
    err_x.hypot(err_y) / norm
}

/// Adapter turning a closure `(mesh, cell, xi, out)` into a [`CellFunction`]
/// with the given number of components.
pub struct CellFn<F>(pub usize, pub F);

impl<F: Fn(&Mesh, usize, [f64; 2], &mut [f64])> CellFunction for CellFn<F> {
    fn components(&self) -> usize {
        self.0
    }
    fn eval(&self, mesh: &Mesh, cell: usize, xi: [f64; 2], out: &mut [f64]) {
        (self.1)(mesh, cell, xi, out)
    }
}

/// Cellwise L2 projection of each component of `f` onto a discontinuous
/// scalar space.
pub fn project_discontinuous(target: &Arc<Space>, f: &dyn CellFunction) -> Result<Vec<Field>> {
    if target.family().is_continuous() || target.family().is_vector() || target.vdim() != 1 {
        return Err(FemError::Incompatible(format!("projection target {:?} is not discontinuous", target.family())));
    }
    let mesh = target.mesh();
    let degree = 2 * target.family().order + 4;
    let rule = gauss_rule(Geometry::from(mesh.kind()), degree)?;
    let n = target.local_size();
    let ncomp = f.components();
    let mut coeffs = vec![vec![0.0; target.ndofs()]; ncomp];
    let tab: Vec<_> = rule.points.iter().map(|&p| target.eval_reference(p)).collect();
    let mut v = [0.0; 2];
    for c in 0..mesh.num_cells() {
        let mut m = DMatrix::<f64>::zeros(n, n);
        let mut rhs = DMatrix::<f64>::zeros(n, ncomp);
        for (q, (p, w)) in rule.iter().enumerate() {
            let wt = w * mesh.cell_geometry(c, p)?.det;
            f.eval(mesh, c, p, &mut v);
            let phi = &tab[q].values;
            for i in 0..n {
                for j in 0..n {
                    m[(i, j)] += wt * phi[i] * phi[j];
                }
                for d in 0..ncomp {
                    rhs[(i, d)] += wt * phi[i] * v[d];
                }
            }
        }
        let sol = m.cholesky().ok_or(FemError::DegenerateGeometry { cell: c, det: 0.0 })?.solve(&rhs);
        for (i, &node) in target.cell_nodes(c).iter().enumerate() {
            for d in 0..ncomp {
                coeffs[d][node] = sol[(i, d)];
            }
        }
    }
    coeffs.into_iter().map(|cf| Field::from_coeffs(target.clone(), cf)).collect()
}

/// `(ux, uy)`: L2 projections of `-grad p` onto the discontinuous space of
/// order `k - 1` for a Lagrange field `p` of order `k`.
pub fn recover_velocity(p: &Field) -> Result<(Field, Field)> {
    let space = p.space();
    let fam = space.family();
    if !fam.is_continuous() || space.vdim() != 1 || fam.order < 1 {
        return Err(FemError::Incompatible(format!("velocity recovery needs a scalar Lagrange field, got {fam:?}")));
    }
    let target = Space::new(space.mesh().clone(), ElementFamily::discontinuous(space.mesh().kind(), fam.order - 1), 1)?;
    let grad = CellFn(2, |_: &Mesh, c, xi, out: &mut [f64]| {
        let g = p.gradient(c, xi).expect("cell geometry validated when the mesh was built");
        out[0] = -g[0];
        out[1] = -g[1];
    });
    let mut parts = project_discontinuous(&target, &grad)?.into_iter();
    Ok((parts.next().expect("two components"), parts.next().expect("two components")))
}

/// Velocity mass-matrix norm `sqrt(d^T M d)`.
pub fn mass_norm(mass: &crate::linalg::SparseMatrix, d: &[f64]) -> Result<f64> {
    let md = mass.spmv(d)?;
    Ok(crate::linalg::dot(d, &md).max(0.0).sqrt())
}
