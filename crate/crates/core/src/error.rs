use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid generator: {0}")]
    InvalidGenerator(String),
    #[error("invalid group specification: {0}")]
    InvalidSpec(String),
    #[error("group specification has no generators")]
    EmptySpec,
    #[error("encoding arity mismatch: expected {expected}, got {got}")]
    ShapeError { expected: usize, got: usize },
    #[error("integer overflow in group arithmetic ({0})")]
    Overflow(&'static str),
    #[error("element budget of {budget} exceeded while building radius {radius_reached}")]
    BudgetExceeded { budget: usize, radius_reached: u32 },
    #[error("cache mismatch: {0}")]
    CacheMismatch(String),
    #[error("corrupt cache file: {0}")]
    CacheCorrupt(String),
    #[error("fit window error: {0}")]
    FitWindowError(String),
    #[error("horizon too small: increase R to {required}")]
    HorizonError { required: u32 },
    #[error("target dimension {target} is not above the fitted dimension {fitted}")]
    TargetTooTight { target: f64, fitted: f64 },
    #[error("invalid construction parameters: {0}")]
    InvalidParams(String),
    #[error("cannot combine an empty list of contexts")]
    EmptyCombination,
    #[error("matrix is not symmetric (entry ({0},{1}))")]
    NotSymmetric(usize, usize),
    #[error("need at least {needed} certified points, have {have}")]
    InsufficientCertifiedPoints { needed: usize, have: usize },
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
