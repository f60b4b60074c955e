use thiserror::Error;

/// Errors raised anywhere in the library.
///
/// The CLI maps `CheckFailed` to exit code 1 and every other variant to
/// exit code 2.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the admissible range of a formula.
    #[error("domain error in {op}: requires {requirement} (got {got})")]
    Domain { op: &'static str, requirement: String, got: String },

    /// Inputs are well-formed but violate a stated precondition.
    #[error("precondition failed in {op}: {detail}")]
    Precondition { op: &'static str, detail: String },

    /// The bound requested does not apply to the boundary regime supplied.
    #[error("wrong regime for {op}: {detail}")]
    WrongRegime { op: &'static str, detail: String },

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("missing parameters: {}", .0.join(", "))]
    MissingParameters(Vec<String>),

    #[error("assembly error: {0}")]
    Assembly(String),

    #[error("solver did not converge after {iterations} iterations (relative residual {residual:e})")]
    Solver { iterations: usize, residual: f64, history: Vec<f64> },

    #[error("sampling error: {0}")]
    Sampling(String),

    #[error("resource guard: {0}")]
    ResourceGuard(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    /// A sub-operation failed while running the named harness check.
    #[error("check `{check}` failed: {source}")]
    InCheck {
        check: String,
        #[source]
        source: Box<Error>,
    },

    #[error("{0} certified check(s) failed")]
    CheckFailed(usize),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(op: &'static str, requirement: impl Into<String>, got: impl std::fmt::Display) -> Self {
        Error::Domain { op, requirement: requirement.into(), got: got.to_string() }
    }

    pub(crate) fn precondition(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Precondition { op, detail: detail.into() }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io { path: path.as_ref().display().to_string(), source }
    }

    pub fn in_check(self, check: impl Into<String>) -> Self {
        Error::InCheck { check: check.into(), source: Box::new(self) }
    }

    /// Process exit code under the CLI contract.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::CheckFailed(_) => 1,
            Error::InCheck { source, .. } => source.exit_code(),
            _ => 2,
        }
    }
}
