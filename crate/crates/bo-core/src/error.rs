//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("degenerate spectrum: eigenvalues {0} and {1} are closer than {2:e}")]
    DegenerateSpectrum(f64, f64, f64),

    #[error(
        "Volterra solve did not converge at lambda = {lambda}: residual {residual:e} \
         after {iterations} iterations (lambda too close to 0 or insufficient decay?)"
    )]
    NonConvergence {
        lambda: f64,
        residual: f64,
        iterations: usize,
    },

    #[error("collocation system ill-conditioned (estimate {0:e}); increase Im z or the xi resolution")]
    IllConditioned(f64),

    #[error("datum has no bound state (N = 0); soliton probe undefined")]
    NoBoundState,

    #[error("blow-up guard tripped at t = {0}: max |u| = {1:e}")]
    BlowUp(f64, f64),

    #[error("insufficient decay at the grid edge: max |u0| = {0:e} on the outer 10% (limit {1:e})")]
    GridDecay(f64, f64),

    #[error("config parse: {0}")]
    ConfigParse(String),

    #[error("tolerance failure in scenario '{scenario}': {failures:?}")]
    ToleranceFailure {
        scenario: String,
        failures: Vec<String>,
    },

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
