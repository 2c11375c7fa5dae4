#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod error;
pub mod kkt;
pub mod manifold;
pub mod problem;
pub mod ripm;
pub mod riptrm;
pub mod suite;
pub mod trace;

pub use error::{Error, Result};
