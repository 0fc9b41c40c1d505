//! File formats, parallel cross-validation and the `fluorocnn` command line
//! on top of [`fluorocnn_core`].

pub mod checkpoint;
pub mod cli;
pub mod config;
pub mod error;
pub mod io;
pub mod output;
pub mod runner;

pub use error::{Error, Result};
