//! Iterative regularization of linear ill-posed problems.
//!
//! The crate centers on the Nesterov-accelerated Landweber iteration
//!
//! ```text
//! z_k     = x_k + alpha_k (x_k - x_{k-1})
//! x_{k+1} = z_k + A*(y - A z_k),        x_0 = 0,  x_1 = A* y
//! ```
//!
//! whose residual polynomials are products of a Landweber factor and a
//! normalized Gegenbauer polynomial. [`polynomials`] evaluates both forms and
//! the bounds they obey, [`solvers`] runs Nesterov, Landweber, the ν-method and
//! CGNE on a [`operators::LinearOperator`], [`stopping`] supplies the
//! discrepancy principle, a priori and oracle rules, and [`experiments`]
//! drives noise-level sweeps and fits convergence rates.

// `!(x > 0.0)` is used on purpose so that NaN parameters are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod experiments;
pub mod operators;
pub mod polynomials;
pub mod solvers;
pub mod stopping;
mod vector;

pub use error::{Error, Result};
pub use operators::{DenseOperator, DiagonalOperator, InverseProblem, LinearOperator};
pub use polynomials::MomentumSchedule;
pub use solvers::{IterateTrace, Method, SolveResult, SolverConfig, Termination};
pub use stopping::StoppingRule;
