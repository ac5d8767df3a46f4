use thiserror::Error;

/// Every failure the library reports.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid layout: {0}")]
    Layout(String),
    #[error("site index {site} out of range for a layout with {n_sites} sites")]
    SiteOutOfRange { site: usize, n_sites: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid rates: {0}")]
    Rates(String),
    #[error("unsupported size n = {n}: {reason}")]
    UnsupportedSize { n: usize, reason: String },
    #[error("steady state is not unique (estimated kernel dimension {kernel_dim})")]
    KernelDegenerate { kernel_dim: usize },
    #[error("no convergence after {iterations} iterations (best residual {best_residual:e})")]
    NoConvergence { iterations: usize, best_residual: f64 },
    #[error("ancilla coherence audit failed: {0}")]
    AuditFailed(String),
    #[error("problem too large: {size} exceeds the cap {cap}")]
    TooLarge { size: usize, cap: usize },
    #[error("step size violation: dt * max_rate = {0} > 0.1")]
    StepSize(f64),
    #[error("Markov chain is reducible")]
    Reducible,
    #[error("state space of {states} configurations exceeds the cap")]
    StateCap { states: usize },
    #[error("linear algebra failure: {0}")]
    Linalg(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
