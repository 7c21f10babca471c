use thiserror::Error;

use crate::design::Violation;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DesignError {
    #[error("invalid design: {}", join(.0))]
    Invalid(Vec<Violation>),
    #[error("blocks do not all have the same size")]
    NotProper,
    #[error("varieties are not equally replicated")]
    NotEquireplicate,
    #[error("a block repeats a variety")]
    RepeatedVarietyInBlock,
}

fn join(violations: &[Violation]) -> String {
    violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("no replicates")]
    NoReplicates,
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: variety {number} out of range 1..={v}")]
    OutOfRange { line: usize, number: usize, v: usize },
    #[error("line {line}: block has {found} varieties, expected {expected}")]
    WrongBlockSize { line: usize, found: usize, expected: usize },
    #[error("replicate {replicate} (ending line {line}): {found} blocks, expected {expected}")]
    WrongBlockCount { replicate: usize, line: usize, found: usize, expected: usize },
    #[error(transparent)]
    Invalid(#[from] DesignError),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EfficiencyError {
    #[error("design is disconnected")]
    Disconnected,
    #[error("design has no blocks")]
    Empty,
    #[error(transparent)]
    Design(#[from] DesignError),
    #[error("average variance needs A > 0")]
    NonPositiveA,
    #[error("square lattice bound needs 2 <= r <= n + 1 (n = {n}, r = {r})")]
    LatticeRange { n: usize, r: usize },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FamilyError {
    #[error("r = {r} is out of range {min}..={max} for this family")]
    OutOfRange { r: usize, min: usize, max: usize },
    #[error("expected a design with v = {v}, k = {k}")]
    Shape { v: usize, k: usize },
    #[error("unknown catalog entry `{0}`")]
    UnknownName(String),
    #[error(transparent)]
    Efficiency(#[from] EfficiencyError),
    #[error(transparent)]
    Design(#[from] DesignError),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SylvesterError {
    #[error("the two 1-factorizations are identical")]
    SameFactorization,
    #[error("galaxy of column {column} is not a partition: {reason}")]
    GalaxyNotPartition { column: usize, reason: String },
    #[error("expected 36 varieties in blocks of 6 with 8 replicates, got v = {v}, k = {k}, r = {r}")]
    Shape { v: usize, k: usize, r: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SearchError {
    #[error("invalid search configuration: {0}")]
    Config(String),
    #[error("no connected design found")]
    NoConnectedDesign,
    #[error(transparent)]
    Efficiency(#[from] EfficiencyError),
}
