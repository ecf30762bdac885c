// `!(x > 0.0)` is used on purpose so that NaN falls into the error branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod check;
pub mod cli;
pub mod corr;
pub mod dist;
pub mod error;
pub mod harness;
pub mod procedures;
pub mod regression;
pub mod rng;
pub mod shift;

pub use error::{Error, Result};
