use thiserror::Error;

use crate::engine::IterationRecord;

/// One or more parameter invariants do not hold.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid parameters: {}", violations.join("; "))]
pub struct ParameterError {
    pub violations: Vec<String>,
}

/// Failure to compute the fitness of a genotype.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("non-finite fitness {value} for {genotype}")]
    NonFinite { genotype: String, value: f64 },
    #[error("evaluator failed: {0}")]
    Evaluator(String),
    #[error("malformed evaluator reply: {0}")]
    MalformedReply(String),
}

/// A strain aborted by an evaluation error, with the records it completed.
#[derive(Debug, Clone, Error)]
#[error("strain aborted after {} iterations: {source}", history.len())]
pub struct RunError {
    #[source]
    pub source: EvalError,
    pub history: Vec<IterationRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("unsupported bit length {0}, expected 8..=64")]
    UnsupportedLength(u32),
    #[error("layer count {0} out of (1, 11]")]
    LayerCountOutOfRange(usize),
    #[error("cannot draw {requested} distinct patient zeros from a space of {available}")]
    SpaceTooSmall { requested: usize, available: u128 },
    #[error("cannot parse genotype {0:?}")]
    Parse(String),
    #[error("empty population")]
    EmptyPopulation,
}
