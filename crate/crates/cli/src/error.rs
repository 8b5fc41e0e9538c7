use std::path::{Path, PathBuf};

use sfc_core::design::DesignError;
use sfc_core::lattice::LatticeError;
use sfc_core::sfcode::FileError;
use sfc_core::spherewrap::WrapError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Construction(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    SchemaMismatch {
        path: PathBuf,
        #[source]
        source: FileError,
    },
    #[error("{path}: malformed CSV: {msg}")]
    MalformedCsv { path: PathBuf, msg: String },
}

impl CliError {
    /// 2 for bad configuration or input files, 3 when construction fails,
    /// 4 for I/O errors.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_)
            | CliError::SchemaMismatch { .. }
            | CliError::MalformedCsv { .. } => 2,
            CliError::Construction(_) => 3,
            CliError::Io { .. } => 4,
        }
    }

    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub(crate) fn csv(path: &Path, msg: impl Into<String>) -> Self {
        CliError::MalformedCsv {
            path: path.to_path_buf(),
            msg: msg.into(),
        }
    }
}

impl From<DesignError> for CliError {
    fn from(e: DesignError) -> Self {
        let msg = e.to_string();
        match e {
            DesignError::Params(_)
            | DesignError::Lattice(
                LatticeError::UnknownFamily(_) | LatticeError::UnsupportedLattice { .. },
            )
            | DesignError::Wrap(
                WrapError::InvalidParams(_) | WrapError::DimensionMismatch { .. },
            ) => CliError::Config(msg),
            _ => CliError::Construction(msg),
        }
    }
}
