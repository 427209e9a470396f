use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}:{line}: {message}", file.display())]
    Parse {
        file: PathBuf,
        line: usize,
        message: String,
    },

    #[error("invalid term: {0}")]
    InvalidTerm(String),

    #[error("invalid triple pattern {pattern}: {reason}")]
    InvalidPattern { pattern: String, reason: String },

    #[error("invalid inference rule `{rule}`: {reason}")]
    InvalidRule { rule: String, reason: String },

    #[error("invalid schema: {0}")]
    InvalidSchema(String),

    #[error("{what} exceeds budget of {limit}")]
    BudgetExceeded { what: &'static str, limit: usize },

    #[error("deadline exceeded")]
    Timeout,

    #[error("chase did not reach a fixpoint after {steps} steps (rule set is probably not weakly acyclic)")]
    ChaseDiverged { steps: usize },

    #[error("antecedent rewriting of `{rule}` did not converge (stopped at depth {depth})")]
    RewritingDiverged { rule: String, depth: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unsupported SHACL in shape {shape}: {term}")]
    UnsupportedShacl { shape: String, term: String },

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn parse(file: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            file: file.into(),
            line,
            message: message.into(),
        }
    }

    pub(crate) fn unsupported(shape: impl ToString, term: impl Into<String>) -> Self {
        Error::UnsupportedShacl {
            shape: shape.to_string(),
            term: term.into(),
        }
    }

    /// Whether the error comes from a resource limit (time, size, depth)
    /// rather than from bad input.
    pub fn is_budget(&self) -> bool {
        matches!(
            self,
            Error::BudgetExceeded { .. }
                | Error::Timeout
                | Error::ChaseDiverged { .. }
                | Error::RewritingDiverged { .. }
        )
    }
}
