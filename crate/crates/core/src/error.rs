use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("modulus {0} is not a prime >= 5")]
    InvalidModulus(u64),
    #[error("attempted to invert zero")]
    ZeroInverse,
    #[error("duplicate evaluation point {0}")]
    DuplicatePoint(u64),
    #[error("factor pole {0} equals the base pole")]
    DegeneratePole(u64),
    #[error("evaluation point {0} coincides with a pole")]
    PoleCollision(u64),
    #[error("linear system is singular")]
    SingularSystem,
    #[error("shape error: {0}")]
    Shape(String),
    #[error("invalid evaluation points: {0}")]
    PointError(String),
    #[error("insufficient responses: need {needed}, got {got}")]
    InsufficientResponses { needed: usize, got: usize },
    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),
    #[error("batch size error: expected {expected} matrices, got {got}")]
    BatchSize { expected: usize, got: usize },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("too many stragglers: {stragglers} > N - K = {tolerable}")]
    TooManyStragglers { stragglers: usize, tolerable: usize },
    #[error("scheme requires the bilinear complexity R(m,p,n)")]
    MissingR,
    #[error("parameters outside the formula's domain: {0}")]
    Domain(String),
    #[error("only defined for the degraded case X_A = X_B (got {x_a} and {x_b})")]
    DegradedOnly { x_a: usize, x_b: usize },
    #[error("noise coefficient matrix is singular for servers {0:?}")]
    SingularNoiseMatrix(Vec<usize>),
    #[error("enumeration needs {needed} cases, budget is {budget}")]
    EnumerationBudgetExceeded { needed: u128, budget: u128 },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
