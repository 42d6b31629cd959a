//! End-to-end drivers and the error metrics they report.

mod bvp1d;
mod compare;
mod darcy;
mod exact;
mod laplace;
mod metrics;
mod navier;
mod stokes;

pub use bvp1d::{solve_bvp_1d, Bvp1dSolution};
pub use compare::{compare_methods, comparison_row, exact_velocity_norm, ComparisonRow, MethodResult};
pub use darcy::{solve_darcy_mixed, MixedSolution};
pub use exact::{
    bvp1d_exact, kovasznay_lambda, perturbation_fixture, ExactSolution, ScalarFunction, VectorFunction, EXACT_NAMES,
};
pub use laplace::{poisson_system, solve_poisson_lagrange, LagrangeSolution};
pub use metrics::{
    l2_error, l2_error_zero_mean, l2_norm, mass_norm, mean_value, project_discontinuous, recover_velocity, u_error,
    CellFn,
};
pub use navier::{solve_navier_steady_picard, NavierSolution, PicardOptions};
pub use stokes::{solve_stokes_steady, FlowSolution};
