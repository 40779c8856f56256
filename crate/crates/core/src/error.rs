use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// The instance (or a file describing one) failed validation.
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    /// A payoff vector is not an allocation of the game.
    #[error("invalid allocation: {0}")]
    InvalidAllocation(String),

    /// An exhaustive routine was asked to enumerate too many coalitions.
    #[error("n = {n} exceeds the enumeration limit of {limit} players")]
    SizeLimit { n: usize, limit: usize },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("modulus mismatch: {0} vs {1}")]
    ModulusMismatch(u64, u64),

    #[error("table cell {0} is infinite and has no witness")]
    InfiniteCell(String),

    #[error("linear program is infeasible: {0}")]
    Infeasible(String),

    #[error("iteration limit of {limit} reached: {context}")]
    IterationLimit { limit: usize, context: String },

    /// A consistency check inside the solver failed. These are bugs, never
    /// a property of the input.
    #[error("internal consistency failure: {0}")]
    Internal(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
