use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("active support of {requested} qubits exceeds the cap of {cap}")]
    SupportCapExceeded { requested: usize, cap: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("qubit {0} lies outside the requested subset")]
    TargetOutsideSubset(usize),
    #[error("invalid gate placement: {0}")]
    InvalidGate(String),
    #[error("matrix is not unitary (max deviation {0:.3e})")]
    NotUnitary(f64),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("candidate net is empty")]
    EmptyNet,
    #[error("net of {size} candidates exceeds the enumeration cap of {cap}")]
    EnumerationCapExceeded { size: u128, cap: usize },
    #[error("postselection onto |0> has probability {0:.3e}")]
    PostselectionImpossible(f64),
    #[error("invalid regime: {0}")]
    InvalidRegime(String),
    #[error("matrix root failed: {0}")]
    EigRootFailure(String),
    #[error("incomplete dataset: {0}")]
    IncompleteDataset(String),
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, msg: msg.into() }
    }
}
