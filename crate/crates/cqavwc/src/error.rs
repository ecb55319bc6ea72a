//! Crate-wide error type.

use thiserror::Error;

/// A single violated channel invariant, with enough context to locate it.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Violation {
    /// `"legal"`, `"eve"`, or `"file"` for schema-level problems.
    pub receiver: String,
    pub input: String,
    pub state: String,
    pub invariant: String,
    pub detail: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "[{} x={} t={}] {}: {}",
            self.receiver, self.input, self.state, self.invariant, self.detail
        )
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("not Hermitian: max deviation {max_dev:.3e} exceeds tolerance {tol:.1e}")]
    NotHermitian { max_dev: f64, tol: f64 },

    #[error("not positive semi-definite: min eigenvalue {min_eig:.3e}")]
    NotPsd { min_eig: f64 },

    #[error("trace {trace} differs from 1 beyond tolerance {tol:.1e}")]
    BadTrace { trace: f64, tol: f64 },

    #[error("operator out of range: {0}")]
    OperatorRange(String),

    #[error("unknown label `{label}` in {place}")]
    UnknownLabel { label: String, place: String },

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("resource cap exceeded: {what} needs {needed}, cap is {cap}")]
    ResourceCap { what: String, needed: u128, cap: u128 },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("channel validation failed with {} violation(s)", .0.len())]
    ChannelInvalid(Vec<Violation>),

    #[error("decoder construction failed: {0}")]
    Decoder(String),

    #[error("linear program solve failed: {0}")]
    Solver(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("stage `{stage}`: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Tags an error with the pipeline stage it came from.
    pub fn at_stage(self, stage: &'static str) -> Self {
        Error::Stage { stage, source: Box::new(self) }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
