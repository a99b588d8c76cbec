use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("configuration error at line {line}, key `{key}`: {message}")]
    ConfigKey { line: usize, key: String, message: String },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("{stage} did not converge after {iterations} iterations (last residual {residual:.3e})")]
    Convergence {
        stage: &'static str,
        iterations: usize,
        residual: f64,
        /// Residual per iteration, oldest first.
        history: Vec<f64>,
    },

    #[error("numerical blow-up (non-finite field) at step {step}")]
    BlowUp { step: usize },

    #[error("basis error: {0}")]
    Basis(String),

    #[error("refusing basis of dimension {dimension} (cap {cap}): {detail}")]
    Capacity { dimension: u128, cap: u128, detail: String },

    #[error("propagation error: {0}")]
    Propagation(String),

    #[error("analysis error: {0}")]
    Analysis(String),

    #[error("snapshot format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit status for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::ConfigKey { .. } => 2,
            Error::Convergence { .. } => 3,
            Error::BlowUp { .. } => 4,
            Error::Capacity { .. } => 5,
            _ => 1,
        }
    }

    pub(crate) fn convergence(stage: &'static str, history: Vec<f64>) -> Self {
        Error::Convergence {
            stage,
            iterations: history.len(),
            residual: history.last().copied().unwrap_or(f64::NAN),
            history,
        }
    }
}
