use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("index {index} out of range for {what} of size {size}")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        size: usize,
    },
    #[error("dimension mismatch: expected {expected}, got {got} ({context})")]
    DimensionMismatch {
        expected: usize,
        got: usize,
        context: &'static str,
    },
    #[error("duplicate qubit {0} in target list")]
    DuplicateTarget(usize),
    #[error("empty qubit list for {0}")]
    EmptyTargets(&'static str),
    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),
    #[error("resource cap exceeded: {what} needs {requested}, cap is {cap}")]
    CapExceeded {
        what: &'static str,
        requested: u128,
        cap: u128,
    },
    #[error("wrong ensemble mode: {0}")]
    WrongMode(&'static str),
    #[error("singular matrix: {0}")]
    Singular(&'static str),
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
