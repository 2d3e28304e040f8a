use thiserror::Error;

use crate::arrangement::ViolationReport;

#[derive(Debug, Error)]
pub enum DaptError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("arithmetic overflow: {0}")]
    Overflow(String),

    #[error("leaf index {index} out of range 1..={leaves}")]
    LeafOutOfRange { index: u64, leaves: u64 },

    #[error("invalid guest graph: {0}")]
    InvalidGuest(String),

    #[error("invalid arrangement: {0}")]
    InvalidArrangement(ViolationReport),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("arrangements are not related by a single leaf swap")]
    NotASingleSwap,

    #[error("search budget of {budget} node visits exceeded")]
    BudgetExceeded { budget: u64 },

    #[error("invalid NMTS instance: {0}")]
    InvalidNmts(String),

    #[error("precondition violations: {}", .0.join("; "))]
    Preconditions(Vec<String>),

    #[error("subtree capacity mismatch: block {block} holds {size} vertices but has {capacity} leaves")]
    CapacityMismatch { block: usize, size: u64, capacity: u64 },

    #[error("malformed document: {0}")]
    Document(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, DaptError>;
