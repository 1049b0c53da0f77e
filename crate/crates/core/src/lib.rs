//! Metric gradient flows on sampled curves.
//!
//! The crate generates curves that satisfy the energy dissipation inequality, checks the
//! axioms of a generalized semiflow on families of them, decides when one solution is a slowed
//! down copy of another and extracts the fastest (minimal) representative by deleting the time
//! a solution spends on critical points.

// `!(a > b)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dissipation;
pub mod error;
pub mod harness;
pub mod io;
pub mod metric;
pub mod mm;
pub mod order;
pub mod problems;

pub use error::{Error, Result};
