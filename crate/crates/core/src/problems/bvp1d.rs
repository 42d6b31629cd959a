//! P1 Galerkin solver for `-u'' = f` on `(0, 1)` with `u(0) = u(1) = 0`.

use crate::error::{FemError, Result};
use crate::linalg::{cg, SolveReport, SolverOptions, TripletBuilder};
use crate::quadrature::gauss_legendre;

#[derive(Debug, Clone)]
pub struct Bvp1dSolution {
    /// Grid points `0, h, ..., 1`.
    pub nodes: Vec<f64>,
    /// Nodal values including the two zero boundary values.
    pub values: Vec<f64>,
    pub report: SolveReport,
}

impl Bvp1dSolution {
    /// Piecewise linear interpolation of the nodal values; zero outside `[0, 1]`.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.nodes.len() - 1;
        if !(0.0..=1.0).contains(&x) {
            return 0.0;
        }
        let e = ((x * n as f64) as usize).min(n - 1);
        let t = (x - self.nodes[e]) * n as f64;
        self.values[e] * (1.0 - t) + self.values[e + 1] * t
    }

    /// L2 distance to `exact` with a 5-point Gauss rule per element.
    pub fn l2_error(&self, exact: impl Fn(f64) -> f64) -> f64 {
        let (pts, wts) = gauss_legendre(5);
        let n = self.nodes.len() - 1;
        let h = 1.0 / n as f64;
        let mut sum = 0.0;
        for e in 0..n {
            for (t, w) in pts.iter().zip(&wts) {
                let x = self.nodes[e] + t * h;
                let uh = self.values[e] * (1.0 - t) + self.values[e + 1] * t;
                sum += w * h * (uh - exact(x)).powi(2);
            }
        }
        sum.sqrt()
    }
}

/// Solves on a uniform grid of `n` elements using a tridiagonal stiffness
/// matrix and CG.
pub fn solve_bvp_1d(n: usize, f: impl Fn(f64) -> f64, opts: &SolverOptions) -> Result<Bvp1dSolution> {
    if n < 2 {
        return Err(FemError::InvalidArgument(format!("need at least 2 elements, got {n}")));
    }
    let h = 1.0 / n as f64;
    let m = n - 1;
    let mut t = TripletBuilder::with_capacity(m, m, 3 * m);
    for i in 0..m {
        t.add(i, i, 2.0 / h);
        if i + 1 < m {
            t.add(i, i + 1, -1.0 / h);
            t.add(i + 1, i, -1.0 / h);
        }
    }
    let a = t.build();
    // load (f, phi_i) with a 4-point rule on each element
    let (pts, wts) = gauss_legendre(4);
    let mut b = vec![0.0; m];
    for e in 0..n {
        for (s, w) in pts.iter().zip(&wts) {
            let fx = f((e as f64 + s) * h) * w * h;
            if e >= 1 {
                b[e - 1] += fx * (1.0 - s);
            }
            if e < m {
                b[e] += fx * s;
            }
        }
    }
    let (x, report) = cg(&a, &b, None, None, opts)?;
    let mut values = vec![0.0; n + 1];
    values[1..n].copy_from_slice(&x);
    let nodes = (0..=n).map(|i| i as f64 * h).collect();
    Ok(Bvp1dSolution { nodes, values, report })
}
