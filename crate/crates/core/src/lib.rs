//! Linear regression with Student-t errors whose degrees of freedom are
//! estimated from the data.
//!
//! The crate covers the likelihood and its information matrices, four
//! estimators of `ν` (profile, adjusted profile, Jeffreys posterior mode,
//! pseudo-posterior mode), the two-stage fit of `β`, OLS and Huber
//! baselines, and a Monte Carlo harness for comparing them.
//!
//! ```
//! use trobust::{estimators::{two_stage_fit, NuMethod}, Dataset, OptimControl};
//!
//! let data = Dataset::stackloss();
//! let fit = two_stage_fit(NuMethod::AdjustedProfile, &data, &OptimControl::default()).unwrap();
//! assert_eq!(fit.beta.len(), 4);
//! ```

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod data;
pub mod error;
pub mod estimators;
pub mod likelihood;
pub mod linalg;
pub mod optimizer;
pub mod rng;
pub mod sim;
pub mod special;

pub use data::{read_csv, Dataset};
pub use error::{Error, Result};
pub use likelihood::{Dof, ModelParams};
pub use linalg::Matrix;
pub use optimizer::OptimControl;
pub use rng::RngStream;
