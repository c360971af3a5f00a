use std::fmt;
use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug)]
pub enum Error {
    /// Newton and the bisection fallback both failed to pin down the invariant.
    SolverFailed { iterations: usize, residual: f64 },
    /// No positive reserve satisfies the invariant for the requested trade.
    QuoteInfeasible,
    /// Malformed arguments to a curve or pool routine.
    InvalidInput(String),
    /// Rejection sampler ran out of proposals.
    SamplingBudgetExhausted { budget: usize },
    /// A configuration value is missing or out of range.
    Config { key: String, message: String },
    Io { path: PathBuf, source: std::io::Error },
    Format { path: PathBuf, message: String },
    /// Failure inside a training run, tagged with where it happened.
    Run { seed: u64, epoch: usize, source: Box<Error> },
}

impl Error {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config { key: key.into(), message: message.into() }
    }

    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidInput(message.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl fmt::Display) -> Self {
        Error::Format { path: path.into(), message: message.to_string() }
    }

    /// True for errors caused by bad configuration rather than a runtime fault.
    pub fn is_config(&self) -> bool {
        match self {
            Error::Config { .. } => true,
            Error::Run { source, .. } => source.is_config(),
            _ => false,
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::SolverFailed { iterations, residual } => write!(
                f,
                "invariant solver did not converge after {iterations} iterations (residual {residual:e})"
            ),
            Error::QuoteInfeasible => write!(f, "trade is infeasible for the current pool"),
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::SamplingBudgetExhausted { budget } => {
                write!(f, "truncated normal sampler exhausted its budget of {budget} proposals")
            }
            Error::Config { key, message } => write!(f, "config key `{key}`: {message}"),
            Error::Io { path, source } => write!(f, "{}: {source}", path.display()),
            Error::Format { path, message } => write!(f, "{}: {message}", path.display()),
            Error::Run { seed, epoch, source } => {
                write!(f, "run with seed {seed} failed at epoch {epoch}: {source}")
            }
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io { source, .. } => Some(source),
            Error::Run { source, .. } => Some(source.as_ref()),
            _ => None,
        }
    }
}
