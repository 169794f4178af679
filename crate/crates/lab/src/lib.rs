//! File formats, experiment harness and command line for `kuramoto-core`.

pub mod calibrate;
pub mod config;
pub mod error;
pub mod experiments;
pub mod formats;

pub use error::{LabError, Result};
