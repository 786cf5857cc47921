//! Truncated chaos-expansion solver for nonlinear Wick-type stochastic
//! evolution equations
//!
//! ```text
//! u_t = nu u_xx + c u + Phi^<>(u) + f
//! ```
//!
//! The random field is expanded as `u = sum_alpha u_alpha H_alpha` over the
//! Hermite basis. Projecting the equation onto each `H_alpha` gives a
//! lower-triangular system: a nonlinear PDE for the expectation `u_0` and
//! linear PDEs for every other coefficient, whose sources only involve
//! lower coefficients. [`propagator::solve`] integrates that system in one
//! forward sweep, and [`diagnostics`] measures the result in the weighted
//! norm scale.
//!
//! The numerical core is generic over [`Real`] (`f32`, `f64`); the Wick
//! algebra works over any [`Coeff`] ring, including exact rationals.

// `!(x >= a)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chaos;
pub mod diagnostics;
pub mod error;
pub mod multiindex;
pub mod pde;
pub mod propagator;
pub mod scalar;

pub use chaos::{AnalyticFunction, ChaosField};
pub use error::{Error, Result};
pub use multiindex::{IndexSet, LogWeight, MultiIndex};
pub use pde::{BoundaryKind, Grid1D, LinearOperatorSpec};
pub use propagator::{solve, ProblemSpec, RunStatus, SolutionBundle};
pub use scalar::{Coeff, Real};

/// Double-precision chaos field.
pub type Field = ChaosField<f64>;
/// Single-precision chaos field.
pub type Field32 = ChaosField<f32>;
/// Chaos field with exact rational coefficients, for the algebra alone.
pub type RationalField = ChaosField<num_rational::Rational64>;
/// Double-precision problem description.
pub type Problem = ProblemSpec<f64>;
/// Double-precision solution bundle.
pub type Bundle = SolutionBundle<f64>;
/// Double-precision grid.
pub type Grid = Grid1D<f64>;
