use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("scale mismatch: field has ell = {field}, grid has ell = {grid}")]
    Scale { field: f64, grid: f64 },

    #[error(
        "fixed-point stage iteration did not converge at t = {t} (tau = {tau}): \
         {iterations} iterations, last increment {last_increment:e}"
    )]
    StepFailure {
        t: f64,
        tau: f64,
        iterations: usize,
        last_increment: f64,
    },

    #[error("singular factorization: {0}")]
    Singular(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported: {0}")]
    Capability(String),

    #[error(
        "continuation failed at stage {stage} (sigma = {sigma}): {reason}; residual history {history:?}"
    )]
    Continuation {
        stage: usize,
        sigma: f64,
        reason: String,
        history: Vec<f64>,
    },
}
