use serde::Serialize;
use thiserror::Error;

/// Failures of a harness run, each with its own exit status.
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid `{field}`: {message}")]
    Validation { field: String, message: String },

    #[error("numerical blow-up at t = {time}: {message}")]
    BlowUp { time: f64, message: String },

    #[error("acceptance band missed: {0}")]
    BandMiss(String),

    #[error("numerical failure: {0}")]
    Numerical(skdv_core::Error),

    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, HarnessError>;

/// Machine-readable form written to `error.json` and stderr.
#[derive(Debug, Serialize)]
pub struct ErrorReport {
    pub error: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    pub message: String,
    pub exit_code: i32,
}

impl HarnessError {
    pub fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self::Validation {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Validation { .. } => 2,
            Self::BlowUp { .. } => 3,
            Self::BandMiss(_) => 4,
            Self::Numerical(_) | Self::Io { .. } => 1,
        }
    }

    pub fn report(&self) -> ErrorReport {
        let (kind, field) = match self {
            Self::Validation { field, .. } => ("validation", Some(field.clone())),
            Self::BlowUp { .. } => ("blow-up", None),
            Self::BandMiss(_) => ("band-miss", None),
            Self::Numerical(_) => ("numerical", None),
            Self::Io { .. } => ("io", None),
        };
        ErrorReport {
            error: kind,
            field,
            message: self.to_string(),
            exit_code: self.exit_code(),
        }
    }

    /// Wraps a core error raised while building objects for config `section`.
    pub(crate) fn from_core(section: &str, e: skdv_core::Error) -> Self {
        use skdv_core::Error as E;
        match e {
            E::InvalidParameter { name, reason } => Self::validation(format!("{section}.{name}"), reason),
            E::InvalidGrid(m) => Self::validation("grid", m),
            E::BlowUp { time, reason } => Self::BlowUp { time, message: reason },
            other => Self::Numerical(other),
        }
    }

    pub(crate) fn io(path: &std::path::Path, e: impl std::fmt::Display) -> Self {
        Self::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        }
    }
}

impl From<skdv_core::Error> for HarnessError {
    fn from(e: skdv_core::Error) -> Self {
        Self::from_core("run", e)
    }
}
