use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("matrix dimension {dim} exceeds the limit of {limit}; lower the boson cutoff or qubit number")]
    DimensionTooLarge { dim: usize, limit: usize },

    #[error("symmetric eigensolver failed on a {dim}x{dim} matrix (max |entry| = {max_abs:e}): {reason}")]
    EigenSolver {
        dim: usize,
        max_abs: f64,
        reason: String,
    },

    /// The population generator has more than one closed class, so the
    /// stationary distribution is not unique.
    #[error("rate matrix has a {} dimensional kernel; closed classes: {components:?}", components.len())]
    DisconnectedRateGraph { components: Vec<Vec<usize>> },

    #[error("one-photon correlator {one_photon:e} is below the underflow floor; the steady state is dark")]
    DarkState { one_photon: f64 },

    #[error("vanishing denominator in {0}")]
    ZeroDenominator(&'static str),

    #[error("spectrum cache: {0}")]
    Cache(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Config(#[from] crate::config::ConfigError),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
