//! File formats, command line and wall-clock benchmark for `hit-core`.

pub mod cli;
pub mod config;
pub mod error;
pub mod io;
pub mod timing;

pub use error::{Error, Result};
