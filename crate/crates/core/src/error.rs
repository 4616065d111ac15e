use thiserror::Error;

/// Errors raised by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PamError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("tolerance not reached: {0}")]
    Tolerance(String),

    #[error("overflow guard tripped: {0}")]
    Overflow(String),

    #[error("horizon mismatch: {0} vs {1}")]
    HorizonMismatch(f64, f64),

    #[error("boundary leak {leak:.3e} exceeds threshold {threshold:.1e} at radius {radius}")]
    Leak {
        leak: f64,
        threshold: f64,
        radius: usize,
    },

    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("eigenvalue {0} is not positive")]
    NonPositiveEigenvalue(f64),

    #[error("no sign change on bracket [{lo}, {hi}]")]
    Bracket { lo: f64, hi: f64 },

    #[error("effective sample size {ess:.1} below {min}")]
    Variance { ess: f64, min: f64 },

    #[error("box of {sites} sites exceeds budget {budget}")]
    Budget { sites: usize, budget: usize },

    #[error("degenerate series: {0}")]
    DegenerateSeries(String),
}

impl PamError {
    /// True for failures of a numerical method (as opposed to bad input).
    pub fn is_numeric_failure(&self) -> bool {
        matches!(
            self,
            PamError::Leak { .. }
                | PamError::NoConvergence { .. }
                | PamError::Tolerance(_)
                | PamError::Overflow(_)
                | PamError::Variance { .. }
                | PamError::Bracket { .. }
                | PamError::NonPositiveEigenvalue(_)
                | PamError::Budget { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, PamError>;
