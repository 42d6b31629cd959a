//! Saddle-point block systems `[[A, B^T], [B, C]]`, with `C` a diagonal that
//! is zero except on pinned pressure DOFs.

use std::sync::Arc;

use super::{apply_essential_bc, assemble_bilinear, assemble_linear, dof_mask, vector_dof_values, BilinearKind, LinearForm};
use crate::elements::ElementFamily;
use crate::error::{FemError, Result};
use crate::linalg::{Ilu0, LinearOperator, SparseMatrix};
use crate::mesh::{CellKind, Mesh};
use crate::spaces::Space;

#[derive(Debug, Clone)]
pub struct BlockSystem {
    /// `n x n` velocity (or flux) block.
    pub a: SparseMatrix,
    /// `m x n` constraint block; `B^T` is applied implicitly.
    pub b: SparseMatrix,
    /// Diagonal of the `m x m` pressure block.
    pub c_diag: Vec<f64>,
    pub rhs_u: Vec<f64>,
    pub rhs_p: Vec<f64>,
    /// True when `B` is the negated divergence form.
    pub negated_divergence: bool,
}

impl BlockSystem {
    pub fn new(
        a: SparseMatrix,
        b: SparseMatrix,
        rhs_u: Vec<f64>,
        rhs_p: Vec<f64>,
        negated_divergence: bool,
    ) -> Result<Self> {
        let n = a.nrows();
        let m = b.nrows();
        for (expected, got) in [(n, a.ncols()), (n, b.ncols()), (n, rhs_u.len()), (m, rhs_p.len())] {
            if expected != got {
                return Err(FemError::DimensionMismatch { expected, got });
            }
        }
        Ok(Self { a, b, c_diag: vec![0.0; m], rhs_u, rhs_p, negated_divergence })
    }

    pub fn n_u(&self) -> usize {
        self.a.nrows()
    }

    pub fn n_p(&self) -> usize {
        self.b.nrows()
    }

    /// Concatenated right-hand side `(rhs_u, rhs_p)`.
    pub fn rhs(&self) -> Vec<f64> {
        let mut r = self.rhs_u.clone();
        r.extend_from_slice(&self.rhs_p);
        r
    }

    pub fn split<'a>(&self, x: &'a [f64]) -> (&'a [f64], &'a [f64]) {
        x.split_at(self.n_u())
    }

    /// Eliminates essential velocity DOFs from `A`, `B` and both right-hand
    /// sides, keeping the operator symmetric whenever `A` is.
    pub fn eliminate_velocity(&mut self, dofs: &[usize], values: &[f64]) -> Result<()> {
        if values.len() != dofs.len() {
            return Err(FemError::DimensionMismatch { expected: dofs.len(), got: values.len() });
        }
        let (mask, full) = dof_mask(self.n_u(), dofs, values)?;
        self.b.eliminate_columns(&mask, &full, &mut self.rhs_p);
        apply_essential_bc(&mut self.a, &mut self.rhs_u, dofs, values)
    }

    /// Fixes pressure DOF `dof` to `value` (row/column elimination with a unit
    /// diagonal in the pressure block).
    pub fn pin_pressure(&mut self, dof: usize, value: f64) -> Result<()> {
        if dof >= self.n_p() {
            return Err(FemError::DofOutOfRange { dof, size: self.n_p() });
        }
        let (cols, vals) = self.b.row(dof);
        for (&j, &v) in cols.iter().zip(vals) {
            self.rhs_u[j] -= v * value;
        }
        let mut mask = vec![false; self.n_p()];
        mask[dof] = true;
        self.b.clear_rows(&mask, None);
        self.c_diag[dof] = 1.0;
        self.rhs_p[dof] = value;
        Ok(())
    }

    /// Inverse of `diag(A)` on the velocity block and of the diagonal of
    /// `B diag(A)^-1 B^T` (plus `C`) on the pressure block. Both are positive
    /// for the systems built here, so this is a valid MINRES preconditioner.
    pub fn diagonal_preconditioner(&self) -> Vec<f64> {
        let da: Vec<f64> = self.a.diagonal().iter().map(|d| d.abs()).collect();
        let mut inv: Vec<f64> = da.iter().map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 }).collect();
        for i in 0..self.n_p() {
            let (cols, vals) = self.b.row(i);
            let s: f64 = cols.iter().zip(vals).map(|(&j, v)| v * v * inv[j]).sum::<f64>() + self.c_diag[i].abs();
            inv.push(if s > 0.0 { 1.0 / s } else { 1.0 });
        }
        inv
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let (n, m) = (self.n_u(), self.n_p());
        let mut d = vec![vec![0.0; n + m]; n + m];
        for (i, row) in self.a.to_dense().into_iter().enumerate() {
            d[i][..n].copy_from_slice(&row);
        }
        for (i, row) in self.b.to_dense().into_iter().enumerate() {
            for (j, v) in row.into_iter().enumerate() {
                d[n + i][j] = v;
                d[j][n + i] = v;
            }
            d[n + i][n + i] = self.c_diag[i];
        }
        d
    }
}

impl LinearOperator for BlockSystem {
    fn size(&self) -> usize {
        self.n_u() + self.n_p()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.n_u();
        let (xu, xp) = x.split_at(n);
        let (yu, yp) = y.split_at_mut(n);
        self.a.spmv_into(xu, yu);
        self.b.spmv_transpose_add(xp, yu);
        self.b.spmv_into(xu, yp);
        for ((y, c), x) in yp.iter_mut().zip(&self.c_diag).zip(xp) {
            *y += c * x;
        }
    }
}

/// A block system together with its velocity (flux) and pressure spaces.
#[derive(Debug, Clone)]
pub struct SaddleProblem {
    pub system: BlockSystem,
    pub u_space: Arc<Space>,
    pub p_space: Arc<Space>,
}

/// Mixed Darcy system for `u + grad p = f`, `div u = g`-type data, with
/// `A = (u, v)`, `B = -(div u, q)`, `rhs_u = (f, v) - <p0, v.n>` and
/// `rhs_p = (g, q)` on RT_k x DiscontinuousP_k.
pub fn build_darcy_system(
    mesh: Arc<Mesh>,
    k: usize,
    f_vec: &dyn Fn([f64; 2]) -> [f64; 2],
    g: &dyn Fn([f64; 2]) -> f64,
    p0: &dyn Fn([f64; 2]) -> f64,
) -> Result<SaddleProblem> {
    if mesh.kind() != CellKind::Triangle {
        return Err(FemError::InvalidArgument("the mixed method needs a triangle mesh".into()));
    }
    let u_space = Space::new(mesh.clone(), ElementFamily::raviart_thomas(k), 1)?;
    let p_space = Space::new(mesh, ElementFamily::discontinuous(CellKind::Triangle, k), 1)?;
    let a = assemble_bilinear(BilinearKind::VectorFEMass, &u_space, &u_space, 1.0)?;
    let b = assemble_bilinear(BilinearKind::VectorFEDivergence, &u_space, &p_space, -1.0)?;
    let mut rhs_u = assemble_linear(LinearForm::VectorDomainLoad(f_vec), &u_space)?;
    let flux = assemble_linear(LinearForm::BoundaryFlux(p0), &u_space)?;
    rhs_u.iter_mut().zip(flux).for_each(|(r, f)| *r -= f);
    let rhs_p = assemble_linear(LinearForm::DomainLoad(g), &p_space)?;
    let system = BlockSystem::new(a, b, rhs_u, rhs_p, true)?;
    Ok(SaddleProblem { system, u_space, p_space })
}

/// Taylor-Hood pieces that do not change between Picard steps.
#[derive(Debug, Clone)]
pub struct StokesBlocks {
    pub u_space: Arc<Space>,
    pub p_space: Arc<Space>,
    pub nu: f64,
    /// `nu * L`.
    pub viscous: SparseMatrix,
    /// `D[i, J] = int q_i div(u_J)`.
    pub divergence: SparseMatrix,
    /// `G[J, i] = int u_J . grad(q_i)`.
    pub gradient: SparseMatrix,
    pub load: Vec<f64>,
    pub bc_dofs: Vec<usize>,
    pub bc_values: Vec<f64>,
    /// Diagonal of the pressure mass matrix.
    pub pressure_mass_diag: Vec<f64>,
}

/// Assembles the Taylor-Hood pair (vector order `k`, pressure order `k - 1`)
/// with Dirichlet velocity `g_d` on the whole boundary.
pub fn stokes_blocks(
    mesh: Arc<Mesh>,
    k: usize,
    nu: f64,
    f_vec: &dyn Fn([f64; 2]) -> [f64; 2],
    g_d: &dyn Fn([f64; 2]) -> [f64; 2],
) -> Result<StokesBlocks> {
    if k < 2 {
        return Err(FemError::UnsupportedOrder { what: "Taylor-Hood velocity (needs k >= 2)", order: k });
    }
    if !(nu > 0.0) {
        return Err(FemError::InvalidArgument(format!("viscosity must be positive, got {nu}")));
    }
    let u_space = Space::new(mesh.clone(), ElementFamily::lagrange(mesh.kind(), k), 2)?;
    let p_space = Space::new(mesh.clone(), ElementFamily::lagrange(mesh.kind(), k - 1), 1)?;
    let viscous = assemble_bilinear(BilinearKind::VectorDiffusion, &u_space, &u_space, nu)?;
    let divergence = assemble_bilinear(BilinearKind::VelocityDivergence, &u_space, &p_space, 1.0)?;
    let gradient = assemble_bilinear(BilinearKind::GradPressure, &p_space, &u_space, 1.0)?;
    let load = assemble_linear(LinearForm::VectorDomainLoad(f_vec), &u_space)?;
    let bc_dofs = u_space.boundary_dofs()?;
    let bc_values = vector_dof_values(&u_space, &bc_dofs, g_d);
    let pressure_mass_diag = assemble_bilinear(BilinearKind::Mass, &p_space, &p_space, 1.0)?.diagonal();
    Ok(StokesBlocks { u_space, p_space, nu, viscous, divergence, gradient, load, bc_dofs, bc_values, pressure_mass_diag })
}

impl StokesBlocks {
    /// Saddle system with velocity block `a` (e.g. `nu L` or `nu L + C(u)`),
    /// `B = -D`, boundary velocities eliminated and pressure DOF 0 pinned to 0.
    pub fn system(&self, a: SparseMatrix) -> Result<BlockSystem> {
        let mut b = self.divergence.clone();
        b.scale(-1.0);
        let mut s = BlockSystem::new(a, b, self.load.clone(), vec![0.0; self.p_space.ndofs()], true)?;
        s.eliminate_velocity(&self.bc_dofs, &self.bc_values)?;
        s.pin_pressure(0, 0.0)?;
        Ok(s)
    }

    /// Block-triangular preconditioner for a system built by [`Self::system`].
    pub fn preconditioner<'a>(&self, sys: &'a BlockSystem) -> Result<BlockTriangularPreconditioner<'a>> {
        let s_inv = self
            .pressure_mass_diag
            .iter()
            .zip(&sys.c_diag)
            .map(|(&m, &c)| if c != 0.0 { 1.0 / c } else { -self.nu / m })
            .collect();
        Ok(BlockTriangularPreconditioner { sys, ilu: Ilu0::new(&sys.a)?, s_inv })
    }
}

/// `P = [[A~, B^T], [0, S~]]` with `A~` the ILU(0) factors of `A` and
/// `S~ = -(1/nu) diag(M_p)` (or `C` on pinned pressure DOFs). Applying the
/// operator computes `P^-1 v`.
#[derive(Debug, Clone)]
pub struct BlockTriangularPreconditioner<'a> {
    sys: &'a BlockSystem,
    ilu: Ilu0,
    s_inv: Vec<f64>,
}

impl LinearOperator for BlockTriangularPreconditioner<'_> {
    fn size(&self) -> usize {
        self.sys.n_u() + self.sys.n_p()
    }

    fn apply(&self, v: &[f64], z: &mut [f64]) {
        let n = self.sys.n_u();
        let (vu, vp) = v.split_at(n);
        let (zu, zp) = z.split_at_mut(n);
        zp.iter_mut().zip(vp.iter().zip(&self.s_inv)).for_each(|(z, (v, s))| *z = v * s);
        let mut t = vec![0.0; n];
        self.sys.b.spmv_transpose_add(zp, &mut t);
        t.iter_mut().zip(vu).for_each(|(t, v)| *t = v - *t);
        self.ilu.solve_into(&t, zu);
    }
}

/// Steady Stokes system `-nu lap u + grad p = f`, `div u = 0`, `u = g_d` on
/// the boundary.
pub fn build_stokes_system(
    mesh: Arc<Mesh>,
    k: usize,
    nu: f64,
    f_vec: &dyn Fn([f64; 2]) -> [f64; 2],
    g_d: &dyn Fn([f64; 2]) -> [f64; 2],
) -> Result<SaddleProblem> {
    let blocks = stokes_blocks(mesh, k, nu, f_vec, g_d)?;
    let system = blocks.system(blocks.viscous.clone())?;
    Ok(SaddleProblem { system, u_space: blocks.u_space, p_space: blocks.p_space })
}
