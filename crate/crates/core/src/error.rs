use thiserror::Error;

/// Errors raised by the physics engines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {context} (expected {expected}, got {got})")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    /// Integrator norm drift above the renormalization threshold.
    #[error("state norm drifted by {drift:.3e} (threshold {threshold:.1e}); integrator misconfigured")]
    NormDrift { drift: f64, threshold: f64 },

    /// Bichromatic detuning exactly on the trap resonance.
    #[error("detuning equals trap frequency (delta = nu = {nu}); gate coefficients diverge")]
    Resonance { nu: f64 },

    #[error("Fock truncation too small: need n_max >= {needed}, have {n_max}")]
    TruncationMargin { needed: usize, n_max: usize },

    #[error("operation requires a z-basis product state")]
    NotProductState,

    #[error("coupling map is not symmetric (max asymmetry {asymmetry:.3e})")]
    AsymmetricCoupling { asymmetry: f64 },

    /// Mean spin too small for the squeezing metric to be defined.
    #[error("squeezing parameter undefined: <J_z>^2 = {jz_sq:.3e} below threshold at t = {t}")]
    UndefinedSqueezing { t: f64, jz_sq: f64 },

    #[error("state has no symmetric component (lost norm {lost_norm:.3e})")]
    NoSymmetricComponent { lost_norm: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
