//! Crate-wide error type.

use crate::linalg2::C64;

#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// Eigenvalue splitting too small for well-defined spectral projections.
    #[error("degenerate spectrum: e+ - e- = {gap:.3e} below threshold {threshold:.3e}")]
    DegenerateSpectrum { gap: f64, threshold: f64 },

    /// Vanishing gap together with zero dephasing makes the transport
    /// denominators singular.
    #[error("singular transport denominator at s = {s}: gap {gap:.3e} below threshold")]
    SingularGap { s: f64, gap: f64 },

    #[error("invalid {field}: {message}")]
    InvalidParam { field: &'static str, message: String },

    /// Adaptive step size fell below the configured minimum. Carries the last
    /// accepted state so callers can inspect where the integration stalled.
    #[error("step size underflow at s = {s:.6e}: h = {h:.3e} < min_step = {min_step:.3e}")]
    StepUnderflow {
        s: f64,
        h: f64,
        min_step: f64,
        last_state: Vec<C64>,
    },

    #[error("rhs evaluation budget exhausted at s = {s:.6e} ({evals} >= {max_evals})")]
    MaxEvalsExceeded {
        s: f64,
        evals: u64,
        max_evals: u64,
        last_state: Vec<C64>,
    },

    #[error("quadrature subdivision limit (depth {max_depth}) exceeded on [{a:.6e}, {b:.6e}]")]
    SubdivisionLimit { a: f64, b: f64, max_depth: u32 },

    /// A retained trajectory sample violated a state-quality bound.
    #[error("state quality violation at s = {s:.6e}: {what} = {value:.3e} exceeds {bound:.3e}")]
    StateQuality {
        s: f64,
        what: &'static str,
        value: f64,
        bound: f64,
    },

    #[error("need at least {needed} distinct points, got {got}")]
    InsufficientData { needed: usize, got: usize },
}

impl Error {
    pub fn invalid(field: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidParam {
            field,
            message: message.into(),
        }
    }
}
