use serde::Serialize;
use thiserror::Error;

/// Errors produced by the library.
///
/// The variants separate malformed input (`Structural`, `Parse`) from inputs
/// that are well formed but outside an operation's domain, so that callers
/// such as the CLI can map them onto distinct exit codes.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GhError {
    /// Input is not even a square matrix of finite numbers, or an index is out of range.
    #[error("structural error: {0}")]
    Structural(String),

    /// Well-formed input that violates an operation's precondition.
    #[error("domain error: {0}")]
    Domain(String),

    /// A search or enumeration cap would be exceeded.
    #[error("resource limit exceeded: {0}")]
    Resource(String),

    /// A randomized generator gave up.
    #[error("generation failed: {0}")]
    Generation(String),

    /// A verification harness observed a counterexample to a proven statement.
    #[error("theorem violation: {0}")]
    TheoremViolation(String),

    /// An invariant that should hold by construction did not (solver bug).
    #[error("internal consistency error: {0}")]
    Internal(String),

    /// Malformed JSON or CSV, with a location when one is known.
    #[error("parse error{}: {message}", location.as_ref().map(|l| format!(" at {l}")).unwrap_or_default())]
    Parse {
        location: Option<String>,
        message: String,
    },
}

/// Serialized as `{"kind": ..., "message": ...}`.
impl Serialize for GhError {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let kind = match self {
            GhError::Structural(_) => "structural",
            GhError::Domain(_) => "domain",
            GhError::Resource(_) => "resource",
            GhError::Generation(_) => "generation",
            GhError::TheoremViolation(_) => "theorem_violation",
            GhError::Internal(_) => "internal",
            GhError::Parse { .. } => "parse",
        };
        let mut s = serializer.serialize_struct("GhError", 2)?;
        s.serialize_field("kind", kind)?;
        s.serialize_field("message", &self.to_string())?;
        s.end()
    }
}

pub type Result<T, E = GhError> = std::result::Result<T, E>;

impl GhError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        GhError::Domain(msg.into())
    }

    pub(crate) fn structural(msg: impl Into<String>) -> Self {
        GhError::Structural(msg.into())
    }

    pub(crate) fn resource(msg: impl Into<String>) -> Self {
        GhError::Resource(msg.into())
    }
}
