use thiserror::Error;

/// Errors produced across the library. Each variant maps onto one of the
/// CLI exit codes through [`Error::exit_code`].
#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("unknown generator {0:?}")]
    UnknownGenerator(String),
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid presentation: {0}")]
    InvalidPresentation(String),
    #[error("backend cannot decide the word problem for this input")]
    BackendCannotDecide,
    #[error("presentation has no relators")]
    EmptyRelators,
    #[error("stable letter appears in input word")]
    StableLetterInInput,
    #[error("budget of {cap} exceeded")]
    BudgetExceeded { cap: usize },
    #[error("distance between {0} and {1} is unknown at this radius")]
    DistanceUnknown(String, String),
    #[error("radius {have} is insufficient (need {need})")]
    RadiusInsufficient { need: usize, have: usize },
    #[error("generator {0} is trivial in the group")]
    TrivialGenerator(usize),
    #[error("graph is not folded")]
    NotFolded,
    #[error("graph is disconnected")]
    Disconnected,
    #[error("not a subgroup: {witness} is not in the target")]
    NotSubgroup { witness: String },
    #[error("invalid move: {0}")]
    MoveInvalid(String),
    #[error("core has no basepoint")]
    NotBased,
    #[error("chain is not nested at step {step}: {witness} escapes")]
    NotNested { step: usize, witness: String },
    #[error("map is not surjective")]
    NotSurjective,
    #[error("rank mismatch: expected {expected}, found {found}")]
    RankMismatch { expected: usize, found: usize },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::RadiusInsufficient { .. } | Error::DistanceUnknown(..) => 3,
            Error::BudgetExceeded { .. } => 4,
            _ => 2,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
