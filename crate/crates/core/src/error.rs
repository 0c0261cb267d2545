use alloc::string::String;
use alloc::vec::Vec;

/// Errors raised by the numeric core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: {left:?} vs {right:?}")]
    Dimension {
        op: &'static str,
        left: Vec<usize>,
        right: Vec<usize>,
    },
    #[error("{op} expects a rank-{expected} tensor, got shape {shape:?}")]
    Rank {
        op: &'static str,
        expected: usize,
        shape: Vec<usize>,
    },
    #[error("angle undefined for a zero vector")]
    UndefinedAngle,
    #[error("{0} is undefined for a constant series")]
    UndefinedMetric(&'static str),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("cannot construct network: {0}")]
    Construction(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("internal consistency violated: {0}")]
    Consistency(String),
    #[error("empty input: {0}")]
    Empty(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;

impl Error {
    pub(crate) fn dim(op: &'static str, left: &[usize], right: &[usize]) -> Self {
        Error::Dimension {
            op,
            left: left.to_vec(),
            right: right.to_vec(),
        }
    }
}
