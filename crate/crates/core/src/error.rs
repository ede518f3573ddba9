use thiserror::Error;

use crate::codes::QubitId;

/// Errors produced anywhere in the compilation pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("code distance must be at least 2, got {0}")]
    InvalidDistance(usize),
    #[error("unknown code kind `{0}`")]
    UnknownCode(String),
    #[error("unknown topology `{0}`")]
    UnknownTopology(String),
    #[error("unknown wiring scheme `{0}`")]
    UnknownWiring(String),
    #[error("number of rounds must be at least 1")]
    InvalidRounds,
    #[error("trap capacity {0} cannot host a two-qubit gate (need at least 2)")]
    InvalidCapacity(usize),
    #[error("invalid device: {0}")]
    InvalidDevice(String),
    #[error("gate improvement factor must be >= 1, got {0}")]
    InvalidImprovement(f64),
    #[error("unsupported gate: {0}")]
    UnsupportedGate(String),
    #[error("device has {traps} traps but {clusters} clusters need placing")]
    InsufficientTraps { traps: usize, clusters: usize },
    #[error("routing stalled: ancilla {qubit} cannot reach trap {trap} ({reason})")]
    Unroutable {
        qubit: QubitId,
        trap: u32,
        reason: String,
    },
    #[error("dependency cycle detected at op {0}")]
    DependencyCycle(usize),
    #[error("circuit is not a memory experiment: {0}")]
    NotMemoryExperiment(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
