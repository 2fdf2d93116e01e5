use thiserror::Error;

/// Errors produced by constructors, operator builders, and the propagators.
#[derive(Debug, Clone, Error)]
pub enum KerrError {
    #[error("invalid dimension {dim}: per-mode Fock cutoff must be at least 2")]
    InvalidDimension { dim: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("matrix is not a valid density matrix: {0}")]
    InvalidState(String),

    #[error("integration failed: step size underflow at t = {t_last}")]
    StepUnderflow { t_last: f64 },

    #[error("integration failed: exceeded {max_steps} steps at t = {t_last}")]
    MaxStepsExceeded { t_last: f64, max_steps: usize },

    #[error("eigendecomposition residual {residual:e} exceeds tolerance {tolerance:e}")]
    EigenResidual { residual: f64, tolerance: f64 },

    #[error("asymmetric dissipation (gamma1 != gamma2) is not supported by the RWA generator")]
    AsymmetricRates,

    #[error("state leaks outside the single-excitation manifold: {leak:e}")]
    ManifoldLeak { leak: f64 },

    #[error("subsystem index {0} out of range (must be 1 or 2)")]
    BadSubsystem(usize),
}

pub type Result<V> = std::result::Result<V, KerrError>;
