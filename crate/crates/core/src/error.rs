use thiserror::Error;

use crate::graph::VertexId;

/// Malformed edge-list input or an edge that violates the simple-graph rules.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("missing `n m` header line")]
    MissingHeader,
    #[error("line {line}: expected two non-negative integers, got `{content}`")]
    Syntax { line: usize, content: String },
    #[error("{}self-loop at vertex {vertex}", fmt_line(*.line))]
    SelfLoop { line: Option<usize>, vertex: VertexId },
    #[error("{}vertex {vertex} out of range for n = {n}", fmt_line(*.line))]
    OutOfRange {
        line: Option<usize>,
        vertex: VertexId,
        n: usize,
    },
    #[error("header announces {expected} edges but {found} edge lines follow")]
    EdgeCount { expected: usize, found: usize },
}

fn fmt_line(line: Option<usize>) -> String {
    line.map(|l| format!("line {l}: ")).unwrap_or_default()
}

/// A parameter outside the supported range.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("k = {k} is below the supported minimum {min}")]
    KTooSmall { k: usize, min: usize },
    #[error("graph has {n} vertices, above the exact-solver cap of {cap}")]
    GraphTooLarge { n: usize, cap: usize },
    #[error("probability {0} outside [0, 1]")]
    Probability(f64),
    #[error("invalid generator spec `{0}`")]
    GeneratorSpec(String),
    #[error("{0}")]
    Other(String),
}

/// A caller broke an operation's precondition (stale candidate, wrong
/// vertex role, invalid partition handed to a checker).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ContractViolation {
    #[error("vertex {0} is not critical")]
    NotCritical(VertexId),
    #[error("stale candidate: {0}")]
    StaleCandidate(String),
    #[error("bad star argument: {0}")]
    BadStar(String),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
}

/// Crate-wide error.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error(transparent)]
    Contract(#[from] ContractViolation),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
