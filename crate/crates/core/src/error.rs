use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("atom index {0} is out of range (expected 1 or 2)")]
    InvalidAtomIndex(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("mean photon number must be non-negative, got {0}")]
    NegativePhotonNumber(f64),

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("matrix trace {0} differs from one")]
    TraceNotUnity(f64),

    #[error("denominator {value:e} at n = {n} is below the validity threshold {threshold:e}")]
    DenominatorNearZero { n: usize, value: f64, threshold: f64 },

    #[error("validity violation: {}", .0.join("; "))]
    ValidityViolation(Vec<String>),

    #[error("outside the fidelity-bound regime: {}", .0.join("; "))]
    RegimeViolation(Vec<String>),

    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("top Fock level population {population:e} exceeds {threshold:e}; increase n_max")]
    TruncationSuspect { population: f64, threshold: f64 },

    #[error("time grid must start at 0 and increase monotonically")]
    InvalidTimeGrid,

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
