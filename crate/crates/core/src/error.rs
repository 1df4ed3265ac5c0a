use alloc::string::String;
use alloc::vec::Vec;

/// Errors raised anywhere in the core library.
///
/// Variants are grouped by who is at fault: the caller's data or configuration
/// (`Data`, `Config`, `Parse`, `Schema`, `Format`) versus a broken internal
/// contract (`Shape`, `Domain`, `Numeric`, `Invariant`).
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("{op}: dimension mismatch between {lhs:?} and {rhs:?}")]
    Shape {
        op: &'static str,
        lhs: Vec<usize>,
        rhs: Vec<usize>,
    },
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("line {line}: parse error: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: schema error: {msg}")]
    Schema { line: usize, msg: String },
    #[error("line {line}: format error: {msg}")]
    Format { line: usize, msg: String },
}

impl Error {
    pub(crate) fn shape(op: &'static str, lhs: &[usize], rhs: &[usize]) -> Self {
        Error::Shape {
            op,
            lhs: lhs.to_vec(),
            rhs: rhs.to_vec(),
        }
    }

    /// True for failures caused by user input (files, flags, datasets) rather
    /// than by a bug in the library.
    pub fn is_user_error(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::Data(_)
                | Error::Parse { .. }
                | Error::Schema { .. }
                | Error::Format { .. }
        )
    }
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
