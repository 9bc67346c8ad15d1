use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument violated a documented precondition.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("invalid dataset: {0}")]
    Dataset(String),

    /// The scattering system could not be solved reliably.
    #[error("numerical failure at {frequency_hz} Hz{}: {reason}", mask_label(*.mask_index))]
    Numerical {
        frequency_hz: f64,
        mask_index: Option<u64>,
        reason: String,
    },

    #[error("zero energy within the {cutoff_s} s cutoff")]
    ZeroEnergy { cutoff_s: f64 },

    #[error("no mask-sensitive band: standard deviation is zero everywhere")]
    NoSensitiveBand,

    #[error("exhaustive search over {n_elements} elements refused (limit {limit}); use coordinate descent")]
    GuardRefused { n_elements: usize, limit: usize },

    #[error("mask {0} is not available from this provider")]
    MaskUnavailable(u64),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("load error in {path}: {message}")]
    Load { path: PathBuf, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn mask_label(mask: Option<u64>) -> String {
    mask.map(|m| format!(" (mask {m})")).unwrap_or_default()
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Attach grid position information to a numerical failure.
    pub fn at_grid_index(self, index: usize) -> Self {
        match self {
            Error::Numerical {
                frequency_hz,
                mask_index,
                reason,
            } => Error::Numerical {
                frequency_hz,
                mask_index,
                reason: format!("grid index {index}: {reason}"),
            },
            other => other,
        }
    }
}
