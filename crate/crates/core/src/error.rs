use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: String, reason: String },

    #[error("configuration error in `{key}`: {reason}")]
    Config { key: String, reason: String },

    /// The eigenbasis could not be trusted; callers should fall back to
    /// time stepping.
    #[error(
        "eigendecomposition rejected (recon residual {recon_residual:.3e}, \
         eigen residual {eig_residual:.3e}): {reason}; use the propagator path"
    )]
    Decomposition {
        reason: String,
        recon_residual: f64,
        eig_residual: f64,
    },

    #[error("propagation failed at t = {time}: {reason}")]
    Propagation { time: f64, reason: String },

    /// A rerun produced tables that differ from the recorded checksums.
    #[error("rerun does not reproduce {}", files.join(", "))]
    Mismatch { files: Vec<String> },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn param(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name: name.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parameter { .. } | Error::Config { .. } => 2,
            Error::Decomposition { .. } | Error::Propagation { .. } | Error::Mismatch { .. } => 3,
            Error::Io { .. } => 4,
        }
    }
}
