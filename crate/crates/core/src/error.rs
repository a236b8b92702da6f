use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("color index {color} out of range for k = {k}")]
    ColorOutOfRange { color: usize, k: usize },

    #[error("vertex {vertex} out of range for n = {n}")]
    VertexOutOfRange { vertex: usize, n: usize },

    #[error("self-loop at vertex {0} in layer {1}")]
    SelfLoop(usize, usize),

    #[error("duplicate edge ({0}, {1}) in layer {2}")]
    DuplicateEdge(usize, usize, usize),

    #[error("malformed graph file at line {line}: {msg}")]
    Malformed { line: usize, msg: String },

    #[error("partition size mismatch: {0} vs {1}")]
    SizeMismatch(usize, usize),

    #[error("oracle limited to n <= {max}, got n = {n}")]
    OracleTooLarge { n: usize, max: usize },

    #[error("max cycle length {0} outside [3, 24]")]
    CycleLenOutOfRange(usize),

    #[error("empty color set on cycle edge {0}")]
    EmptyColorSet(usize),

    #[error("vertex set is not a CA-component")]
    NotCaBlock,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("regime mismatch: expected {expected}, got {actual}")]
    RegimeMismatch { expected: String, actual: String },

    #[error("invalid experiment config: {0}")]
    InvalidConfig(String),

    #[error("resource guard: n * trials = {0} exceeds {1}")]
    ResourceGuard(u128, u128),

    #[error("too few samples: need at least {need}, got {got}")]
    TooFewSamples { need: usize, got: usize },

    #[error("empty input")]
    EmptyInput,
}
