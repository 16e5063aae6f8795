use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Which side of a transfer tripped a capacity check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Send,
    Receive,
}

impl std::fmt::Display for Direction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Direction::Send => "send",
            Direction::Receive => "receive",
        })
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("vertex {vertex} out of range (n = {n})")]
    InvalidVertex { vertex: u64, n: usize },

    #[error("vertex {0} exhausted its palette")]
    PaletteExhausted(u32),

    #[error("search space {space} exceeds cap {cap}")]
    CapExceeded { space: u128, cap: u128 },

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("infeasible generator parameters: {0}")]
    InfeasibleParameters(String),

    #[error("key {key} not below modulus {modulus}")]
    KeyOutOfRange { key: u64, modulus: u64 },

    #[error("modulus {0} is not prime")]
    NonPrimeModulus(u64),

    #[error("degree {delta} below partition threshold {threshold:.1}")]
    DegreeTooLow { delta: usize, threshold: f64 },

    #[error("partition precondition: {0}")]
    PartitionPrecondition(String),

    #[error("vertex {vertex} overloaded: {direction} {amount} words exceeds {cap}")]
    OverloadedVertex {
        vertex: u32,
        direction: Direction,
        amount: u64,
        cap: u64,
    },

    #[error("{} vertices unresolved by the simulation", .0.len())]
    UnresolvedVertices(Vec<u32>),

    #[error("bad parameters: {0}")]
    Parameter(String),

    #[error("could not build instance: {0}")]
    InfeasibleSpec(String),

    #[error("machine {machine} exceeded memory in round {round}: {words} > {cap} words")]
    MemoryExceeded {
        machine: usize,
        round: u64,
        words: u64,
        cap: u64,
    },

    #[error("query budget {budget} exceeded while resolving vertex {vertex}")]
    QueryBudgetExceeded { vertex: u32, budget: u64 },

    #[error("config: {0}")]
    Config(String),
}
