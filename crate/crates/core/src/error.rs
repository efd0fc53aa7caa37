use std::fmt;

use crate::spectral::Diagnostics;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse error classes; the CLI maps each one to an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Parse,
    Validation,
    Numerical,
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("unknown unit tag `{0}`")]
    UnknownUnit(String),

    #[error("scenario parse error: {0}")]
    Parse(String),

    #[error("invalid link configuration:\n{0}")]
    Validation(Diagnostics),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("power evolution diverged at z = {z:.6e} m")]
    Divergence { z: f64 },

    #[error("degenerate tilt: |T| = {t:.3e} for channel at {frequency:.6e} Hz (fitted profile crosses zero)")]
    DegenerateTilt { t: f64, frequency: f64 },

    #[error("degenerate dispersion: |phi_ik| = {phi:.3e} for channel pair ({f_i:.6e} Hz, {f_k:.6e} Hz)")]
    DegenerateDispersion { phi: f64, f_i: f64, f_k: f64 },

    #[error("dispersion-free channel at {frequency:.6e} Hz: SPM closed form undefined")]
    DispersionFree { frequency: f64 },

    #[error("degenerate closed-form denominator: {0}")]
    DegenerateDenominator(String),

    #[error("normalized profile is not positive at zeta = {zeta:.6e} m (value {value:.3e})")]
    NegativeProfile { zeta: f64, value: f64 },

    #[error("identity `{name}` failed: relative error {rel_err:.3e} with parameters {params}")]
    IdentityFailure {
        name: String,
        rel_err: f64,
        params: String,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::UnknownUnit(_) | Error::Parse(_) | Error::Io(_) => ErrorClass::Parse,
            Error::Validation(_) | Error::InvalidInput(_) => ErrorClass::Validation,
            Error::Divergence { .. }
            | Error::DegenerateTilt { .. }
            | Error::DegenerateDispersion { .. }
            | Error::DispersionFree { .. }
            | Error::DegenerateDenominator(_)
            | Error::NegativeProfile { .. }
            | Error::IdentityFailure { .. } => ErrorClass::Numerical,
        }
    }
}

impl fmt::Display for ErrorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ErrorClass::Parse => "parse",
            ErrorClass::Validation => "validation",
            ErrorClass::Numerical => "numerical",
        };
        f.write_str(s)
    }
}
