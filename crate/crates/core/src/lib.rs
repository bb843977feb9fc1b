//! Finite-difference solvers for the 1-D semilinear pseudo-parabolic equation
//!
//! `d_t(rho u) - (eta u_xt)_x - (kappa u_x)_x = f(u) + f_tilde + p(t, x) h(t)`
//!
//! on `(0, T) x (0, L)` with homogeneous Dirichlet data, together with the
//! inverse problem of recovering `h` from `integral u(t, x) omega(x) dx = m(t)`.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod conditions;
pub mod direct;
pub mod error;
pub mod grid;
pub mod inverse;
pub mod trajectory;
pub mod tridiag;
pub mod verification;

pub use conditions::{
    check_interpretation_report, evaluate_conditions, AssumptionFlags, ConditionReport,
};
pub use direct::{
    cn_direct_step, rothe_direct_step, run_direct, CnNonlinearity, DirectScheme, DirectSchemeConfig,
};
pub use error::{Error, ErrorKind, Result};
pub use grid::{
    measure, measure_with, sample_function, sample_midpoints, sample_nodes, tabulated,
    CoefficientField, Lipschitz, NodalField, Nonlinearity, ProblemSpec, Quadrature, ScalarFn,
    SpaceTimeFn, SpaceTimeGrid, Weight,
};
pub use inverse::{
    cn_inverse_step, rothe_inverse_step, run_inverse, InverseScheme, InverseSchemeConfig,
    InverseStep, KappaCoupling,
};
pub use trajectory::{SourceSample, StepDiagnostics, Trajectory};
pub use tridiag::{
    assemble_laplacian, assemble_operator_m, assemble_variable_flux, rank_one_solve, thomas_solve,
    TridiagonalMatrix,
};
