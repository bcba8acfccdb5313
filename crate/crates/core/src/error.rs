use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("wavelength {wavelength:.6e} m outside Sellmeier range [{min:.6e}, {max:.6e}] m")]
    OutOfRange { wavelength: f64, min: f64, max: f64 },

    #[error("evanescent mode: |q| = {q:.6e} rad/m exceeds k = {k:.6e} rad/m")]
    Evanescent { q: f64, k: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unknown Sellmeier form `{0}` (known: four-term, sellmeier)")]
    UnknownForm(String),

    #[error("missing key `{key}` in section [{section}]")]
    MissingKey { section: String, key: String },

    #[error("{what} did not converge: achieved {achieved:.3e}, requested {requested:.3e}")]
    Convergence {
        what: &'static str,
        achieved: f64,
        requested: f64,
    },

    #[error("no collinear degenerate phase matching in (0, pi/2)")]
    NoPhaseMatching,

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("peak not resolved in window")]
    PeakNotResolved,

    #[error("ridge not detected: {0}")]
    RidgeNotDetected(String),

    #[error("io error on {path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for failures of an iterative or quadrature scheme.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Convergence { .. } | Error::NoPhaseMatching)
    }
}
