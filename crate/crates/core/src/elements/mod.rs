//! Reference elements and their shape functions.
//!
//! Reference cells are the unit right triangle `{(0,0),(1,0),(0,1)}` and the
//! unit square `[0,1]²`.

mod lagrange;
mod raviart_thomas;

pub use lagrange::{NodeEntity, ScalarElement};
pub use raviart_thomas::RtElement;

use crate::error::{FemError, Result};
use crate::mesh::{CellGeometry, CellKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FamilyKind {
    /// Continuous P_k on triangles.
    LagrangeP,
    /// Continuous Q_k on quadrilaterals.
    LagrangeQ,
    DiscontinuousP,
    DiscontinuousQ,
    RaviartThomas,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ElementFamily {
    pub kind: FamilyKind,
    pub order: usize,
}

impl ElementFamily {
    pub const fn new(kind: FamilyKind, order: usize) -> Self {
        Self { kind, order }
    }

    /// Continuous Lagrange family matching the cell kind (P_k or Q_k).
    pub fn lagrange(cell: CellKind, order: usize) -> Self {
        match cell {
            CellKind::Triangle => Self::new(FamilyKind::LagrangeP, order),
            CellKind::Quad => Self::new(FamilyKind::LagrangeQ, order),
        }
    }

    /// Discontinuous family matching the cell kind.
    pub fn discontinuous(cell: CellKind, order: usize) -> Self {
        match cell {
            CellKind::Triangle => Self::new(FamilyKind::DiscontinuousP, order),
            CellKind::Quad => Self::new(FamilyKind::DiscontinuousQ, order),
        }
    }

    pub fn raviart_thomas(order: usize) -> Self {
        Self::new(FamilyKind::RaviartThomas, order)
    }

    pub fn cell_kind(&self) -> CellKind {
        match self.kind {
            FamilyKind::LagrangeP | FamilyKind::DiscontinuousP | FamilyKind::RaviartThomas => CellKind::Triangle,
            FamilyKind::LagrangeQ | FamilyKind::DiscontinuousQ => CellKind::Quad,
        }
    }

    pub fn is_vector(&self) -> bool {
        self.kind == FamilyKind::RaviartThomas
    }

    pub fn is_continuous(&self) -> bool {
        matches!(self.kind, FamilyKind::LagrangeP | FamilyKind::LagrangeQ)
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi, what) = match self.kind {
            FamilyKind::LagrangeP | FamilyKind::LagrangeQ => (1, 4, "Lagrange"),
            FamilyKind::DiscontinuousP | FamilyKind::DiscontinuousQ => (0, 3, "discontinuous"),
            FamilyKind::RaviartThomas => (0, 1, "Raviart-Thomas"),
        };
        if self.order < lo || self.order > hi {
            return Err(FemError::UnsupportedOrder { what, order: self.order });
        }
        Ok(())
    }

    /// Number of shape functions on one cell.
    pub fn dofs_per_cell(&self) -> usize {
        let k = self.order;
        match self.kind {
            FamilyKind::LagrangeP | FamilyKind::DiscontinuousP => (k + 1) * (k + 2) / 2,
            FamilyKind::LagrangeQ | FamilyKind::DiscontinuousQ => (k + 1) * (k + 1),
            FamilyKind::RaviartThomas => (k + 1) * (k + 3),
        }
    }

    /// Highest polynomial degree of the shape functions (per variable on quads).
    pub fn polynomial_degree(&self) -> usize {
        match self.kind {
            FamilyKind::RaviartThomas => self.order + 1,
            _ => self.order,
        }
    }
}

/// Shape functions evaluated at one point. Scalar families fill `values` and
/// `gradients`; Raviart-Thomas fills `vectors` and `divergences`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BasisEval {
    pub values: Vec<f64>,
    pub gradients: Vec<[f64; 2]>,
    pub vectors: Vec<[f64; 2]>,
    pub divergences: Vec<f64>,
}

impl BasisEval {
    pub fn len(&self) -> usize {
        self.values.len().max(self.vectors.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A reference element of any supported family.
#[derive(Debug, Clone)]
pub enum ReferenceElement {
    Scalar(ScalarElement),
    RaviartThomas(RtElement),
}

impl ReferenceElement {
    pub fn new(family: ElementFamily) -> Result<Self> {
        family.validate()?;
        Ok(match family.kind {
            FamilyKind::RaviartThomas => Self::RaviartThomas(RtElement::new(family.order)?),
            _ => Self::Scalar(ScalarElement::new(family)?),
        })
    }

    pub fn family(&self) -> ElementFamily {
        match self {
            Self::Scalar(e) => e.family(),
            Self::RaviartThomas(e) => ElementFamily::raviart_thomas(e.order()),
        }
    }

    pub fn eval(&self, xi: [f64; 2]) -> BasisEval {
        match self {
            Self::Scalar(e) => e.eval(xi),
            Self::RaviartThomas(e) => e.eval(xi),
        }
    }
}

/// Nodal basis of a scalar family at a reference point.
pub fn eval_scalar_basis(family: ElementFamily, xi: [f64; 2]) -> Result<BasisEval> {
    family.validate()?;
    if family.is_vector() {
        return Err(FemError::InvalidArgument(format!("{family:?} is not a scalar family")));
    }
    Ok(ScalarElement::new(family)?.eval(xi))
}

/// RT_k basis (k = 0, 1) on the reference triangle.
pub fn eval_rt_basis(k: usize, xi: [f64; 2]) -> Result<BasisEval> {
    Ok(RtElement::new(k)?.eval(xi))
}

/// Maps reference scalar gradients to the physical cell.
pub fn map_scalar(geom: &CellGeometry, reference: &BasisEval) -> BasisEval {
    BasisEval {
        values: reference.values.clone(),
        gradients: reference.gradients.iter().map(|&g| geom.gradient(g)).collect(),
        ..Default::default()
    }
}

/// Contravariant Piola transform of a Raviart-Thomas evaluation:
/// `v = J v_ref / det J`, `div v = div_ref / det J`.
pub fn piola_map(geom: &CellGeometry, reference: &BasisEval) -> BasisEval {
    BasisEval {
        vectors: reference.vectors.iter().map(|&v| geom.piola(v)).collect(),
        divergences: reference.divergences.iter().map(|&d| d / geom.det).collect(),
        ..Default::default()
    }
}
