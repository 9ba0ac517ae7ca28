use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A time index or table size beyond what an operand covers.
    Range {
        what: &'static str,
        requested: usize,
        available: usize,
    },
    /// The model cannot be built from the given structure.
    Model(String),
    /// State-space enumeration hit its cap.
    Capacity { limit: usize, reached: usize },
    /// A scalar parameter is outside its domain.
    Parameter(String),
    /// A numerical routine failed.
    Numeric(String),
    /// No route between a source and its destination.
    Connectivity { source: usize, destination: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Range {
                what,
                requested,
                available,
            } => write!(
                f,
                "{what}: index {requested} exceeds horizon {available}"
            ),
            Error::Model(msg) => write!(f, "model error: {msg}"),
            Error::Capacity { limit, reached } => write!(
                f,
                "state space exceeds cap of {limit} (enumeration reached {reached})"
            ),
            Error::Parameter(msg) => write!(f, "parameter error: {msg}"),
            Error::Numeric(msg) => write!(f, "numeric error: {msg}"),
            Error::Connectivity {
                source,
                destination,
            } => write!(f, "no route from node {source} to node {destination}"),
        }
    }
}

impl core::error::Error for Error {}

pub(crate) fn param(msg: impl Into<String>) -> Error {
    Error::Parameter(msg.into())
}
