use thiserror::Error;

use crate::graph_space::Vertex;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{name} must be ≥ {min}, got {value}")]
    TooSmall {
        name: &'static str,
        min: usize,
        value: usize,
    },

    #[error("loop weight {name} must be a non-negative finite number, got {value}")]
    InvalidLoopWeight { name: &'static str, value: f64 },

    #[error("vertex {0} is out of range")]
    VertexOutOfRange(Vertex),

    #[error("vertex {0} has no self-loop in this basis")]
    MissingLoop(Vertex),

    #[error("states live in different arc bases")]
    BasisMismatch,

    #[error("expected {expected} amplitudes, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("state is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("{0} is not supported")]
    Unsupported(String),

    #[error("empty search window ({0}, {1})")]
    EmptyWindow(f64, f64),

    #[error("empty range")]
    EmptyRange,
}

pub type Result<T> = std::result::Result<T, Error>;
