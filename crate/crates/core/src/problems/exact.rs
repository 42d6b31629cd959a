//! Closed-form solutions used as manufactured references.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{FemError, Result};

pub type ScalarFunction = Arc<dyn Fn([f64; 2]) -> f64 + Send + Sync>;
pub type VectorFunction = Arc<dyn Fn([f64; 2]) -> [f64; 2] + Send + Sync>;

/// A named exact solution. Laplace pairs satisfy `-lap p = source` and
/// `u = -grad p`; flow solutions satisfy the steady momentum equation with
/// body force `force`.
#[derive(Clone)]
pub struct ExactSolution {
    pub name: String,
    pub p: Option<ScalarFunction>,
    pub u: Option<VectorFunction>,
    pub source: Option<ScalarFunction>,
    pub force: Option<VectorFunction>,
}

impl std::fmt::Debug for ExactSolution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ExactSolution").field("name", &self.name).finish_non_exhaustive()
    }
}

/// Registered names accepted by [`ExactSolution::by_name`].
pub const EXACT_NAMES: [&str; 5] = ["sinsin", "harmonic", "vortex", "hydrostatic", "kovasznay"];

impl ExactSolution {
    /// `p = sin(pi x) sin(pi y)`, `-lap p = 2 pi^2 p`.
    pub fn sinsin() -> Self {
        Self {
            name: "sinsin".into(),
            p: Some(Arc::new(|x: [f64; 2]| (PI * x[0]).sin() * (PI * x[1]).sin())),
            u: Some(Arc::new(|x: [f64; 2]| {
                [-PI * (PI * x[0]).cos() * (PI * x[1]).sin(), -PI * (PI * x[0]).sin() * (PI * x[1]).cos()]
            })),
            source: Some(Arc::new(|x: [f64; 2]| 2.0 * PI * PI * (PI * x[0]).sin() * (PI * x[1]).sin())),
            force: None,
        }
    }

    /// Harmonic `p = e^x sin y` with `u = -grad p`; the reference for the
    /// absolute-error columns of the comparison table.
    pub fn harmonic() -> Self {
        Self {
            name: "harmonic".into(),
            p: Some(Arc::new(|x: [f64; 2]| x[0].exp() * x[1].sin())),
            u: Some(Arc::new(|x: [f64; 2]| [-x[0].exp() * x[1].sin(), -x[0].exp() * x[1].cos()])),
            source: Some(Arc::new(|_| 0.0)),
            force: None,
        }
    }

    /// Divergence-free Stokes solution on the unit square, zero on its
    /// boundary: `u = (pi sin^2(pi x) sin(2 pi y), -pi sin(2 pi x) sin^2(pi y))`,
    /// `p = cos(pi x) cos(pi y)`, `f = -nu lap u + grad p`.
    pub fn vortex(nu: f64) -> Self {
        Self {
            name: "vortex".into(),
            p: Some(Arc::new(|x: [f64; 2]| (PI * x[0]).cos() * (PI * x[1]).cos())),
            u: Some(Arc::new(|x: [f64; 2]| {
                let (sx, sy) = ((PI * x[0]).sin(), (PI * x[1]).sin());
                [PI * sx * sx * (2.0 * PI * x[1]).sin(), -PI * (2.0 * PI * x[0]).sin() * sy * sy]
            })),
            source: None,
            force: Some(Arc::new(move |x: [f64; 2]| {
                let lap1 = 2.0 * PI.powi(3) * (2.0 * PI * x[1]).sin() * (2.0 * (2.0 * PI * x[0]).cos() - 1.0);
                let lap2 = -2.0 * PI.powi(3) * (2.0 * PI * x[0]).sin() * (2.0 * (2.0 * PI * x[1]).cos() - 1.0);
                let gp = [-PI * (PI * x[0]).sin() * (PI * x[1]).cos(), -PI * (PI * x[0]).cos() * (PI * x[1]).sin()];
                [-nu * lap1 + gp[0], -nu * lap2 + gp[1]]
            })),
        }
    }

    /// Fluid at rest under `f = (0, -1)`: `u = 0`, `p = -y` up to a constant.
    pub fn hydrostatic() -> Self {
        Self {
            name: "hydrostatic".into(),
            p: Some(Arc::new(|x: [f64; 2]| -x[1])),
            u: Some(Arc::new(|_| [0.0, 0.0])),
            source: None,
            force: Some(Arc::new(|_| [0.0, -1.0])),
        }
    }

    /// Kovasznay flow (velocity only), an exact steady Navier-Stokes
    /// solution for `nu = 1 / re` with zero body force.
    pub fn kovasznay(re: f64) -> Self {
        let lam = kovasznay_lambda(re);
        Self {
            name: "kovasznay".into(),
            p: None,
            u: Some(Arc::new(move |x: [f64; 2]| {
                let e = (lam * x[0]).exp();
                [1.0 - e * (2.0 * PI * x[1]).cos(), lam / (2.0 * PI) * e * (2.0 * PI * x[1]).sin()]
            })),
            source: None,
            force: Some(Arc::new(|_| [0.0, 0.0])),
        }
    }

    /// Looks up a registered solution; `nu` feeds "vortex", `re` feeds
    /// "kovasznay".
    pub fn by_name(name: &str, nu: f64, re: f64) -> Result<Self> {
        match name {
            "sinsin" => Ok(Self::sinsin()),
            "harmonic" => Ok(Self::harmonic()),
            "vortex" => Ok(Self::vortex(nu)),
            "hydrostatic" => Ok(Self::hydrostatic()),
            "kovasznay" => {
                if !(re > 0.0) {
                    return Err(FemError::InvalidArgument(format!("Reynolds number must be positive, got {re}")));
                }
                Ok(Self::kovasznay(re))
            }
            _ => Err(FemError::InvalidArgument(format!(
                "unknown exact solution '{name}' (known: {})",
                EXACT_NAMES.join(", ")
            ))),
        }
    }
}

/// `lambda = re/2 - sqrt(re^2/4 + 4 pi^2)`.
pub fn kovasznay_lambda(re: f64) -> f64 {
    re / 2.0 - (re * re / 4.0 + 4.0 * PI * PI).sqrt()
}

/// `delta (q, q)` with `q = (x + 0.5)(x - 1)(y + 0.5)(y - 1.5)`, which
/// vanishes on the boundary of `[-0.5, 1] x [-0.5, 1.5]`.
pub fn perturbation_fixture(delta: f64) -> impl Fn([f64; 2]) -> [f64; 2] + Send + Sync + Clone {
    move |x: [f64; 2]| {
        let q = delta * (x[0] + 0.5) * (x[0] - 1.0) * (x[1] + 0.5) * (x[1] - 1.5);
        [q, q]
    }
}

/// `u(x) = -e^x + (e - 1) x + 1`, solving `-u'' = e^x` with `u(0) = u(1) = 0`.
pub fn bvp1d_exact(x: f64) -> f64 {
    -x.exp() + (std::f64::consts::E - 1.0) * x + 1.0
}
