//! Weak-pulse slow light in a tripod medium: closed-form dark-state-polariton
//! fields, direct PDE solvers, conversion-efficiency analysis and the
//! storage/retrieval protocol.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod analytic;
pub mod cli;
pub mod error;
pub mod model;
pub mod pde;
pub mod protocol;
pub mod quadrature;
pub mod specfun;

pub use error::{Error, Result};
