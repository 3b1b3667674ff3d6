use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("reservation price could not be bracketed below {upper}")]
    NoBracket { upper: f64 },

    #[error("bisection did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("utility undefined: wealth {wealth} is at or below the floor -{floor}")]
    BelowWealthFloor { wealth: f64, floor: f64 },

    #[error("need at least {needed} observations, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("series has zero variance")]
    ZeroVariance,

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("{path}: {message}")]
    Parse { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// Process exit code for the CLI: 2 for validation problems, 3 for
    /// numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NoBracket { .. }
            | Error::NoConvergence { .. }
            | Error::BelowWealthFloor { .. }
            | Error::ZeroVariance
            | Error::NonFinite(_) => 3,
            _ => 2,
        }
    }

    pub fn is_numerical(&self) -> bool {
        self.exit_code() == 3
    }
}
