//! Lasso / least angle regression paths and the significance tests built on
//! them: the covariance test, the first-step spacing test, Monte Carlo t_max
//! tests for forward stepwise, extreme-value (Gumbel and gap) tests, the
//! ForwardStop rule, and a seeded simulation lab.
//!
//! The deterministic numerics are generic over [`Scalar`] (`f32` or `f64`);
//! the aliases below fix the `f64` instantiation used by the simulation lab
//! and the CLI.

// `!(x > 0)` style guards are deliberate: they reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod lasso_path;
pub mod numkit;
pub mod scalar;
pub mod seltests;
pub mod simlab;
pub mod stopping;

pub use error::{Error, Result};
pub use numkit::RandomStream;
pub use scalar::Scalar;

/// Library version, recorded in experiment sidecars.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub type Matrix = numkit::DenseMatrix<f64>;
pub type Matrix32 = numkit::DenseMatrix<f32>;
pub type Path = lasso_path::PathTrace<f64>;
pub type Path32 = lasso_path::PathTrace<f32>;
pub type Stepwise = lasso_path::StepwiseTrace<f64>;
