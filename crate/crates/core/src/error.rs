use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("enumeration budget exceeded: {what} reached {reached} (budget {budget})")]
    BudgetExceeded {
        what: &'static str,
        reached: u64,
        budget: u64,
    },

    #[error("horizon exceeded after {0} steps")]
    HorizonExceeded(u64),

    #[error("no feasible state at vertex {vertex}")]
    NoFeasibleState { vertex: usize },

    #[error("boundary condition admits no feasible extension")]
    BoundaryInfeasible,

    #[error("vertex set does not induce a forest (witness vertex {witness})")]
    NotAForest { witness: usize },

    #[error("degenerate chain: {0}")]
    DegenerateChain(String),

    #[error("peeled graph not unicyclic: component containing vertex {witness} has tree excess {excess}")]
    PeeledNotUnicyclic { witness: usize, excess: i64 },

    #[error("palette exhausted at vertex {vertex}")]
    PaletteExhausted { vertex: usize },

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("non-unique attachment of vertex {vertex} to its skeleton")]
    NonUniqueAttachment { vertex: usize },

    #[error("labeling inconsistency at good vertex {vertex}")]
    LabelingInconsistency { vertex: usize },

    #[error("bound hypothesis not met: {0}")]
    HypothesisNotMet(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// Budget and horizon exhaustion are reported separately from check
    /// failures by the command-line front end.
    pub fn is_exhaustion(&self) -> bool {
        matches!(self, Error::BudgetExceeded { .. } | Error::HorizonExceeded(_))
    }
}
