use std::fmt;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Why a particular node cannot be accommodated.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeDiagnosis {
    pub node: usize,
    pub id: String,
    pub reason: String,
    /// Energy slack in joules at the point that was checked, when meaningful.
    pub slack: Option<f64>,
}

impl fmt::Display for NodeDiagnosis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "node {} ({}): {}", self.node, self.id, self.reason)?;
        if let Some(s) = self.slack {
            write!(f, " [slack {s:.6e} J]")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("infeasible: {}", join_diagnoses(.0))]
    Infeasible(Vec<NodeDiagnosis>),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

fn join_diagnoses(d: &[NodeDiagnosis]) -> String {
    d.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

impl Error {
    pub(crate) fn param(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// Process exit status used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Infeasible(_) => 2,
            Error::InvalidParameter { .. } | Error::Parse(_) | Error::Io(_) => 3,
            Error::InvalidState(_) | Error::Csv(_) => 4,
        }
    }
}
