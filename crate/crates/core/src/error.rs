use thiserror::Error;

use crate::boolfn::VarId;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("arity mismatch: expected {expected}, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("count {count} out of range for arity {n}")]
    CountOutOfRange { n: usize, count: usize },
    #[error("invalid prime {tag} for arity {n}")]
    InvalidPrime { n: usize, tag: String },
    #[error("variable {0} is not in scope")]
    VarOutOfScope(VarId),
    #[error("variable {0} unassigned")]
    MissingVar(VarId),
    #[error("duplicate variable {0}")]
    DuplicateVar(VarId),
    #[error("scope of {size} variables exceeds the enumeration cap of {cap}")]
    ScopeTooLarge { size: usize, cap: usize },
    #[error("empty variable order")]
    EmptyOrder,
    #[error("ordering mismatch between diagrams")]
    OrderingMismatch,
    #[error("unknown vtree node {0}")]
    UnknownVtreeNode(usize),
    #[error("vtree node {0} is a leaf")]
    LeafVtreeNode(usize),
    #[error("vtree mismatch: {0}")]
    VtreeMismatch(String),
    #[error("decision node needs at least 2 elements, got {0}")]
    TooFewElements(usize),
    #[error("unknown sdd node {0}")]
    UnknownNode(usize),
    #[error("prime is not in OBDD form: {0}")]
    PrimeNotObdd(String),
    #[error("invalid input diagram: {0}")]
    InvalidDiagram(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("bad function spec `{0}`")]
    BadFunctionSpec(String),
    #[error("invalid range: {0}")]
    InvalidRange(String),
    #[error("output: {0}")]
    Output(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}
