use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A rate, capacity or size that must be positive was not.
    InvalidParameter { what: &'static str, value: f64 },
    /// Scenario or topology configuration is inconsistent.
    Config(String),
    /// The topology failed validation; the report lists each violation.
    InvalidTopology(String),
    /// Tier budgets cannot hold every stream.
    Infeasible { streams: usize, capacity: usize },
    /// The exhaustive oracle refuses instances above its size bound.
    TooLarge { streams: usize, bound: usize },
    /// A placement breaks exclusivity or a node's rate capacity.
    CapacityExceeded { node: String, load: f64, limit: f64 },
    /// Two assignments being compared cover different streams.
    MismatchedStreams,
    UnknownId(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter { what, value } => write!(f, "invalid parameter {what}: {value}"),
            Error::Config(msg) => write!(f, "configuration error: {msg}"),
            Error::InvalidTopology(msg) => write!(f, "invalid topology: {msg}"),
            Error::Infeasible { streams, capacity } => write!(
                f,
                "infeasible: {streams} streams exceed aggregate tier budget {capacity} (deficit {})",
                streams - capacity
            ),
            Error::TooLarge { streams, bound } => {
                write!(f, "instance has {streams} streams, oracle bound is {bound}")
            }
            Error::CapacityExceeded { node, load, limit } => {
                write!(f, "node {node} overloaded: {load} tasks/s > limit {limit}")
            }
            Error::MismatchedStreams => f.write_str("assignments cover different stream sets"),
            Error::UnknownId(id) => write!(f, "unknown id {id}"),
        }
    }
}

impl core::error::Error for Error {}
