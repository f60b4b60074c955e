//! Explicit a-priori constants for mixed elliptic problems with bounded
//! measurable (or Dini-continuous) coefficients, together with a 2-D P1
//! finite-element solver and discrete Green kernels that certify them
//! numerically.

// `!(x > 0.0)` rejects NaN along with the non-positive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod cli;
pub mod constants;
pub mod error;
pub mod expr;
pub mod fem;
pub mod green;
pub mod harness;

pub use error::{Error, Result};
