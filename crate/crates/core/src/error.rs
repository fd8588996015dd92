use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QfieldError {
    #[error("radicand mismatch: sqrt({0}) vs sqrt({1})")]
    RadicandMismatch(u64, u64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("cannot parse rational {0:?}")]
    Parse(String),
    #[error("negative radicand {0}")]
    NegativeRadicand(String),
    #[error("radicand for {0} does not fit in 64 bits")]
    RadicandOverflow(String),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Qfield(#[from] QfieldError),
    #[error("malformed algebra: {0}")]
    Malformed(String),
    #[error("axiom {axiom} violated: {detail}")]
    AxiomViolated { axiom: &'static str, detail: String },
    #[error("invalid degree spec: {0}")]
    InvalidSpec(String),
    #[error("algebra is trivial (dimension {0} <= 3)")]
    Trivial(usize),
    #[error("algebra is not amorphic: {0}")]
    NotAmorphic(String),
    #[error("recovered epsilon is not +-1: {0}")]
    BadEpsilon(String),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("partition is not closed under the involution: {0}")]
    StarNotPreserved(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("enumeration cap exceeded: {size} > {cap}")]
    CapExceeded { size: usize, cap: usize },
    #[error("invalid affine plane: {0}")]
    Plane(String),
    #[error("matrix product not in the span of the basis: {0}")]
    NotInSpan(String),
    #[error("character computation failed: {0}")]
    Characters(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
