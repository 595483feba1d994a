use thiserror::Error;

/// Errors raised by the numerical engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A problem parameter violates a standing constraint (for example `alpha > -n/p`).
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("gamma function pole at x = {0}")]
    GammaPole(f64),

    /// Gamma(alpha/2) sits at a pole, so the kernel normalization vanishes.
    #[error("degenerate normalization: Gamma(alpha/2) has a pole at alpha = {0}")]
    DegenerateNormalization(f64),

    #[error("non-integrable endpoint singularity: cosine exponent {exponent} <= -1")]
    Singularity { exponent: f64 },

    #[error("unsupported dimension n = {n}: {reason}")]
    Dimension { n: usize, reason: &'static str },

    #[error("integral diverges: {0}")]
    Divergent(String),

    #[error("quadrature did not converge: estimate {estimate:e}, error {error:e}, tolerance {tolerance:e}")]
    NonConvergence { estimate: f64, error: f64, tolerance: f64 },

    /// Two independent routes to the same quantity disagree beyond tolerance.
    #[error("cross-check failed for {what}: {left:e} vs {right:e}")]
    CrossCheck { what: &'static str, left: f64, right: f64 },
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NonConvergence { .. } | Error::CrossCheck { .. } => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
