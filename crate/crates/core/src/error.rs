use num_complex::Complex64;
use thiserror::Error;

use crate::charmatrix::RootList;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed model document: {0}")]
    Parse(String),

    #[error("invalid model: {0}")]
    Invalid(String),

    #[error("delay out of range: {delay} not in [0, {max_delay}]")]
    DelayOutOfRange { delay: f64, max_delay: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("period mismatch: base frequencies {0} and {1}")]
    PeriodMismatch(f64, f64),

    #[error("real-valued series violates c(-m) = conj(c(m)) at mode {mode}")]
    RealFlagViolation { mode: i64 },

    #[error("stencil order mismatch: expected {expected}, found {found}")]
    OrderMismatch { expected: usize, found: usize },

    #[error("missing {0} stencil")]
    MissingStencil(&'static str),

    #[error("not a root: smallest singular value {sigma_min:e} exceeds {threshold:e}")]
    NotARoot { sigma_min: f64, threshold: f64 },

    #[error("eigenvalue is not simple: {0}")]
    NotSimple(String),

    #[error("resonant modes {modes:?} at z = {z}")]
    ResonantMode { z: Complex64, modes: Vec<i64> },

    #[error("pole of J at x = {x}: |w(x)| = {w:e}")]
    PoleAtX { x: f64, w: f64 },

    #[error("root count {found} disagrees with winding number {winding}")]
    WindingMismatch {
        found: usize,
        winding: i64,
        partial: RootList,
    },

    #[error("invalid step: {0}")]
    InvalidStep(String),

    #[error("trajectory span too short: need t >= {needed}, have {available}")]
    InsufficientSpan { needed: f64, available: f64 },

    #[error("degenerate fit: {0}")]
    Degenerate(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Numerical failures (resonance, poles, non-simple roots) as opposed to
    /// malformed input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotARoot { .. }
                | Error::NotSimple(_)
                | Error::ResonantMode { .. }
                | Error::PoleAtX { .. }
                | Error::WindingMismatch { .. }
                | Error::Degenerate(_)
        )
    }
}
