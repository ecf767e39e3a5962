use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::lp::LpStatus;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// An input violated a data invariant; `path` names the offending field.
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },

    #[error("prior set has no vertices")]
    EmptyPriorSet,

    #[error("ambiguous experiment has no generators")]
    EmptyGenerators,

    #[error("experiment is not canonical: {0}")]
    NonCanonical(String),

    #[error("operation needs two states and two actions, got {states} states and {actions} actions")]
    NotBinary { states: usize, actions: usize },

    #[error("receiver payoff difference has a single sign, one action weakly dominates")]
    Degenerate,

    #[error("linear program failed with status {0:?}")]
    Lp(LpStatus),

    #[error("precondition: {0}")]
    Precondition(String),

    #[error("malformed witness: {0}")]
    MalformedWitness(String),

    #[error("theorem-violation: {0}")]
    TheoremViolation(Box<ViolationReport>),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("internal: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn invalid(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Invalid {
            path: path.into(),
            message: message.into(),
        }
    }
}

/// Diagnostics attached to a failed no-gain construction.
#[derive(Debug, Clone, Serialize)]
pub struct ViolationReport {
    pub message: String,
    pub diagnostics: serde_json::Value,
}

impl fmt::Display for ViolationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.message, self.diagnostics)
    }
}
