//! One-dimensional convolutional regression of chemical quality parameters
//! from single fluorescence spectra.
//!
//! The crate is `no_std` and only needs `alloc`. It carries the numerical
//! pieces: spectrum preprocessing, a synthetic spectrum generator, a small
//! hand-written 1D-CNN with exact backpropagation, leave-one-oil-out
//! cross-validation, the pooled two-sample t-test used to compare
//! hyperparameter settings, and the regulatory grading sequence.
//! File formats, parallel fold execution and the command line live in the
//! `fluorocnn` companion crate.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod data;
pub mod error;
pub mod eval;
pub mod nn;
pub mod quality;
pub mod seed;
pub mod stats;
pub mod synth;

pub use data::{
    filter_for_parameter, normalize, normalize_values, subtract_dark, Dataset, Excitation, OilRecord, ParameterId,
    Quality, Spectrum, WavelengthGrid,
};
pub use error::{Error, Result};
pub use eval::{loocv, mae, select_checkpoint, CvSummary, FoldResult};
pub use nn::{build_network, HyperParams, Network};
pub use quality::{classify, QualityVerdict, ThresholdSet};
pub use stats::{compare_configs, pooled_sd, t_critical, t_statistic, TTestReport};
pub use synth::{generate_dataset, generate_spectrum, GeneratorConfig};
