//! Gauss rules on the reference edge `[0,1]`, triangle and square.
//!
//! Edge and square rules are (tensor) Gauss-Legendre. Degrees 1 and 2 on the
//! triangle use the classical symmetric centroid and edge-interior rules; from
//! degree 3 up the triangle rule is the collapsed (Duffy) product of a
//! Gauss-Legendre rule and a Gauss-Jacobi(1,0) rule, which keeps every weight
//! positive and every point strictly inside the cell.

use crate::error::{FemError, Result};
use crate::mesh::CellKind;

/// Highest polynomial degree any rule is generated for.
pub const MAX_DEGREE: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Geometry {
    Edge,
    Triangle,
    Quad,
}

impl From<CellKind> for Geometry {
    fn from(kind: CellKind) -> Self {
        match kind {
            CellKind::Triangle => Geometry::Triangle,
            CellKind::Quad => Geometry::Quad,
        }
    }
}

impl Geometry {
    pub fn measure(self) -> f64 {
        match self {
            Geometry::Edge | Geometry::Quad => 1.0,
            Geometry::Triangle => 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadRule {
    pub geometry: Geometry,
    /// Polynomial degree integrated exactly (total degree on the triangle,
    /// degree in each variable on the square).
    pub degree: usize,
    /// Reference points; edge rules use only the first coordinate.
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl QuadRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = ([f64; 2], f64)> + '_ {
        self.points.iter().copied().zip(self.weights.iter().copied())
    }
}

/// Integration order used for elements of order `k`: `max(2, 2k + 1)`.
pub fn quad_order_for(k: usize) -> usize {
    (2 * k + 1).max(2)
}

/// A rule on `geometry` exact for polynomials up to `degree`.
pub fn gauss_rule(geometry: Geometry, degree: usize) -> Result<QuadRule> {
    if degree > MAX_DEGREE {
        return Err(FemError::UnsupportedDegree(degree));
    }
    let n = degree / 2 + 1;
    let rule = match geometry {
        Geometry::Edge => {
            let (x, w) = gauss_legendre(n);
            QuadRule {
                geometry,
                degree: 2 * n - 1,
                points: x.iter().map(|&x| [x, 0.0]).collect(),
                weights: w,
            }
        }
        Geometry::Quad => {
            let (x, w) = gauss_legendre(n);
            let mut points = Vec::with_capacity(n * n);
            let mut weights = Vec::with_capacity(n * n);
            for j in 0..n {
                for i in 0..n {
                    points.push([x[i], x[j]]);
                    weights.push(w[i] * w[j]);
                }
            }
            QuadRule { geometry, degree: 2 * n - 1, points, weights }
        }
        Geometry::Triangle if degree <= 1 => QuadRule {
            geometry,
            degree: 1,
            points: vec![[1.0 / 3.0, 1.0 / 3.0]],
            weights: vec![0.5],
        },
        Geometry::Triangle if degree == 2 => QuadRule {
            geometry,
            degree: 2,
            points: vec![[1.0 / 6.0, 1.0 / 6.0], [2.0 / 3.0, 1.0 / 6.0], [1.0 / 6.0, 2.0 / 3.0]],
            weights: vec![1.0 / 6.0; 3],
        },
        Geometry::Triangle => {
            let (xs, ws) = gauss_legendre(n);
            let (ts, vs) = gauss_jacobi_10(n);
            let mut points = Vec::with_capacity(n * n);
            let mut weights = Vec::with_capacity(n * n);
            for (&eta, &we) in ts.iter().zip(&vs) {
                for (&xi, &wx) in xs.iter().zip(&ws) {
                    points.push([xi * (1.0 - eta), eta]);
                    weights.push(wx * we);
                }
            }
            QuadRule { geometry, degree: 2 * n - 1, points, weights }
        }
    };
    Ok(rule)
}

/// Nodes and weights of the `n`-point Gauss rule for the weight `w` on `[0,1]`
/// given the recurrence of the orthonormal polynomials of `w` on `[-1,1]`.
///
/// Nodes come from Newton iteration on the degree-`n` polynomial (started at
/// Chebyshev-like guesses and deflated against found roots); weights are the
/// Christoffel numbers `1 / sum_j q_j(x)^2`.
fn gauss_from_recurrence(
    n: usize,
    mu0: f64,
    a: impl Fn(usize) -> f64,
    b: impl Fn(usize) -> f64,
) -> (Vec<f64>, Vec<f64>) {
    // q_j orthonormal: b_j q_{j+1} = (x - a_j) q_j - b_{j-1} q_{j-1}
    let eval = |x: f64| -> (f64, f64, f64) {
        let mut q_prev = 0.0;
        let mut dq_prev = 0.0;
        let mut q = 1.0 / mu0.sqrt();
        let mut dq = 0.0;
        let mut sum_sq = q * q;
        for j in 0..n {
            let b_prev = if j == 0 { 0.0 } else { b(j - 1) };
            let q_next = ((x - a(j)) * q - b_prev * q_prev) / b(j);
            let dq_next = (q + (x - a(j)) * dq - b_prev * dq_prev) / b(j);
            q_prev = q;
            dq_prev = dq;
            q = q_next;
            dq = dq_next;
            if j + 1 < n {
                sum_sq += q * q;
            }
        }
        (q, dq, sum_sq)
    };
    let mut roots: Vec<f64> = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = -(std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (q, dq, _) = eval(x);
            let deflate: f64 = roots.iter().map(|r| 1.0 / (x - r)).sum();
            let step = q / (dq - q * deflate);
            x -= step;
            if step.abs() <= 1e-16 * (1.0 + x.abs()) {
                break;
            }
        }
        roots.push(x);
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for &x in &roots {
        let (_, _, sum_sq) = eval(x);
        nodes.push(0.5 * (x + 1.0));
        weights.push(1.0 / sum_sq);
    }
    (nodes, weights)
}

/// Gauss-Legendre on `[0,1]`, weights summing to 1.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_from_recurrence(
        n,
        2.0,
        |_| 0.0,
        |j| {
            let k = (j + 1) as f64;
            k / (4.0 * k * k - 1.0).sqrt()
        },
    );
    (x, w.into_iter().map(|w| 0.5 * w).collect())
}

/// Gauss-Jacobi with weight `(1 - eta)` on `[0,1]`; weights sum to 1/2.
fn gauss_jacobi_10(n: usize) -> (Vec<f64>, Vec<f64>) {
    // alpha = 1, beta = 0 on [-1,1]
    let (al, be) = (1.0f64, 0.0f64);
    let (x, w) = gauss_from_recurrence(
        n,
        2.0,
        |j| {
            let s = 2.0 * j as f64 + al + be;
            (be * be - al * al) / (s * (s + 2.0))
        },
        |j| {
            let k = (j + 1) as f64;
            let s = 2.0 * j as f64 + al + be;
            (4.0 * k * (k + al) * (k + be) * (k + al + be) / ((s + 1.0) * (s + 2.0).powi(2) * (s + 3.0))).sqrt()
        },
    );
    // (1 - t) dt on [-1,1] = 4 (1 - eta) d eta on [0,1]
    (x, w.into_iter().map(|w| 0.25 * w).collect())
}
