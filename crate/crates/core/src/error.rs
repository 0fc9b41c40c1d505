use alloc::boxed::Box;
use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("degenerate spectrum: all intensities are equal")]
    DegenerateSpectrum,

    #[error("spectrum is already normalized")]
    AlreadyNormalized,

    #[error("empty dataset")]
    EmptyDataset,

    #[error("empty batch")]
    EmptyBatch,

    #[error("invalid wavelength grid: {0}")]
    InvalidGrid(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("invalid oil record `{oil}`: {reason}")]
    InvalidRecord { oil: String, reason: String },

    #[error("duplicate oil id `{0}`")]
    DuplicateOil(String),

    #[error("unsupported excitation wavelength {0} nm (expected 365 or 395)")]
    UnsupportedExcitation(u32),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("shape error: {0}")]
    Shape(String),

    #[error("architecture error at layer `{layer}`: {reason}")]
    Architecture { layer: &'static str, reason: String },

    #[error("internal consistency error: {0}")]
    Internal(String),

    #[error("training diverged at epoch {epoch}: non-finite loss")]
    Divergence { epoch: usize },

    #[error("fold `{oil}`: {source}")]
    Fold { oil: String, source: Box<Error> },

    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),

    #[error("pooled deviation is zero but the means differ")]
    DegenerateVariance,

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

impl Error {
    /// Wraps the error with the id of the fold's held-out oil.
    pub fn in_fold(self, oil: &str) -> Self {
        Error::Fold {
            oil: oil.into(),
            source: Box::new(self),
        }
    }
}
