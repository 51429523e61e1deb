use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("potential entry {value} at {location} is not strictly positive")]
    NonPositive { location: String, value: f64 },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("node {0} is out of range")]
    InvalidNode(usize),
    #[error("self-loop on node {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("no edge between {0} and {1}")]
    MissingEdge(usize, usize),
    #[error("message {from}->{to} degenerated to zero mass")]
    NumericDegeneracy { from: usize, to: usize },
    #[error("domain violation: {0}")]
    Domain(String),
    #[error("state space of {0} configurations exceeds the enumeration limit")]
    StateSpaceTooLarge(u128),
    #[error("computation tree exceeds {0} nodes")]
    TreeTooLarge(usize),
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unavailable: {0}")]
    Unavailable(String),
}

pub type Result<T> = std::result::Result<T, Error>;
