//! Two-dimensional finite elements: meshes, Lagrange and Raviart-Thomas
//! spaces, sparse assembly, Krylov solvers, and drivers for Poisson, mixed
//! Darcy, Stokes and steady Navier-Stokes problems.

pub mod assembly;
pub mod elements;
pub mod error;
pub mod io;
pub mod linalg;
pub mod mesh;
pub mod problems;
pub mod quadrature;
pub mod spaces;

pub use elements::ElementFamily;
pub use error::{FemError, MeshError, Result};
pub use linalg::{SolveReport, SolverOptions, SparseMatrix};
pub use mesh::{CellKind, Mesh};
pub use problems::{ComparisonRow, ExactSolution, PicardOptions};
pub use spaces::{Field, Space};
