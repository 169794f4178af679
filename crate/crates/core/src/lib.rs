//! Numerical core for the stochastic Kuramoto model on graph sequences.
//!
//! Everything here is `no_std` + `alloc` and deterministic given explicit
//! seeds. File formats, the command line and experiment orchestration live
//! in the `kuramoto-lab` crate.
#![no_std]
// `!(x > 0.0)` style guards are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod error;
pub mod graph;
pub mod manifold;
pub mod mean_field;
pub mod particle;
pub mod torus;

pub use error::{Error, Result};
