use thiserror::Error;

/// Errors produced by the analytics engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid flow {flow} on edge {source_node} -> {target}")]
    InvalidFlow {
        source_node: String,
        target: String,
        flow: f64,
    },
    #[error("edge endpoint {0} is not in the node list")]
    UnknownNode(String),
    #[error("network needs at least 2 nodes, got {0}")]
    TooSmall(usize),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionError { expected: usize, actual: usize },
    #[error("flow file mixes years {first} and {other} (line {line})")]
    MixedYears { first: i32, other: i32, line: u64 },
    #[error("parse error on line {line}: {message}")]
    ParseError { line: u64, message: String },
    #[error("duplicate key {0}")]
    DuplicateKey(String),
    #[error("all GDP values are zero in year {0}")]
    DegenerateYear(i32),
    #[error("panel is inconsistent: {0}")]
    PanelInconsistent(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("node {index} ({label}) has no outgoing flow")]
    DanglingNode { index: usize, label: String },
    #[error("power iteration did not converge within {iterations} iterations{}", run.map(|r| format!(" (run {r})")).unwrap_or_default())]
    NoConvergence { iterations: usize, run: Option<usize> },
    #[error("eigenvalue 1 has multiplicity {0}; chain is not irreducible")]
    NotIrreducible(usize),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("alpha must be greater than -100, got {0}")]
    InvalidAlpha(f64),
    #[error("threshold must lie in (0, 1), got {0}")]
    InvalidThreshold(f64),
    #[error("perturbing node {node} leaves column {column} without outflow")]
    DanglingAfterPerturbation { node: usize, column: usize },
    #[error("economy codes do not match between network and GDP data: {0}")]
    KeyMismatch(String),
    #[error("series has {len} points, needs at least {needed}")]
    InsufficientHistory { len: usize, needed: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
