use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("mode index {index} out of range for {modes} modes")]
    IndexOutOfRange { index: usize, modes: usize },

    #[error("two-mode element needs distinct modes, got {0} twice")]
    RepeatedMode(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("subsystem must contain at least one mode")]
    EmptySubsystem,

    #[error("mode {mode} is not part of the subsystem")]
    ModeNotInSubsystem { mode: usize },

    #[error("covariance matrix is not symmetric (max asymmetry {0:e})")]
    AsymmetricCovariance(f64),

    #[error("state is unphysical: smallest symplectic eigenvalue {min_nu} < 1")]
    UnphysicalState { min_nu: f64 },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("global state is not pure (purity {purity})")]
    GlobalStateNotPure { purity: f64 },

    #[error("photon subtraction from a vacuum mode (mean photon weight {weight:e})")]
    VacuumModeSubtraction { weight: f64 },

    #[error("reduced covariance is ill-conditioned (condition number {condition:e})")]
    SingularCovariance { condition: f64 },

    #[error("thermal occupation must satisfy n >= 1, got {0}")]
    InvalidOccupation(f64),

    #[error("invalid adjacency matrix: {0}")]
    InvalidAdjacency(String),

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("Fock cutoff too small: leakage {leakage:e} exceeds tolerance {tolerance:e}")]
    CutoffTooSmall { leakage: f64, tolerance: f64 },

    #[error("ladder operator produced a zero-norm state")]
    ZeroNorm,

    #[error("too many modes for enumeration: {modes} (limit {limit})")]
    TooManyModes { modes: usize, limit: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}
