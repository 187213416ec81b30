use thiserror::Error;

/// Errors raised by the library.
///
/// Unsatisfiable star-tuples are *not* errors: operations that can produce
/// an empty denotation return `Option::None` (or simply drop the tuple from a
/// cylinder). The variants here are structural problems with the input.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("column index {index} out of range for dimension {dim}")]
    ColumnOutOfRange { index: usize, dim: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("malformed literal: {0}")]
    MalformedLiteral(String),

    #[error("flavor mismatch: cannot combine {0} and {1} star-cylinders")]
    FlavorMismatch(&'static str, &'static str),

    #[error("invalid star-cylinder: {0}")]
    InvalidCylinder(String),

    #[error("constant `{0}` is not in the active domain")]
    ConstantOutsideDomain(String),

    #[error("overlapping swap pairs: {0}")]
    OverlappingSwap(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("parse error at {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("line {line}: {msg}")]
    Load { line: usize, msg: String },

    #[error("{0}")]
    Semantic(String),

    #[error("budget exceeded: {0}")]
    Budget(String),

    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
