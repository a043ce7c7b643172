//! Large-deviations efficiency analysis for importance sampling.
//!
//! The modules mirror the workflow: build an [`prob_models::ImportanceModel`],
//! evaluate subset or quantile rates, and check predictions against exact
//! finite-alphabet Laplace values or simulation.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod laplace_lab;
pub mod numerics;
pub mod prob_models;
pub mod quantile_analysis;
pub mod rate_functions;
pub mod subset_analysis;
pub mod serde_ext;
pub mod stream;

pub use error::{Error, Result};
