//! Variable-selection uncertainty: how far a selected model is likely to be
//! from the true one, estimated from a weighted ensemble of candidate models.

// `!(x > 0.0)` is used on purpose so that NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod data;
pub mod ensemble;
pub mod error;
pub mod glm;
pub mod measures;
pub mod numeric;
pub mod paths;
pub mod simharness;

pub use data::{Dataset, Family};
pub use error::{PaviError, Result};
pub use measures::{CandidateEnsemble, VariableSet};
