use thiserror::Error;

/// Errors raised by state construction, circuit building, channels and tomography.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("register of {0} qubits exceeds the 3-qubit limit")]
    TooManyQubits(usize),

    #[error("qubit index {index} is outside a {size}-qubit register")]
    InvalidQubit { index: usize, size: usize },

    #[error("invalid qubit set: {0}")]
    InvalidQubitSet(String),

    #[error("length {0} is not 2^n for n in 1..=3")]
    BadLength(usize),

    #[error("state is not normalized (squared norm {0})")]
    NotNormalized(f64),

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("trace is not 1 (got {0})")]
    InvalidTrace(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPositive(f64),

    #[error("matrix is not unitary (max deviation {0:e})")]
    NotUnitary(f64),

    #[error("D does not commute with Z on qubit {qubit} (deviation {deviation:e})")]
    NotZCommuting { qubit: usize, deviation: f64 },

    #[error("Kraus operators are not trace preserving (max deviation {0:e})")]
    NotTracePreserving(f64),

    #[error("probability {0} outside [0, 1]")]
    ProbabilityOutOfRange(f64),

    #[error("sampled measurement branch has probability {0:e}")]
    DegenerateBranch(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no mean phonon number for recool {recool_us} us, measurement {meas_us} us")]
    MissingPhononEntry { recool_us: f64, meas_us: f64 },

    #[error("invalid setting label {0:?}")]
    InvalidSetting(String),

    #[error("count record is malformed: {0}")]
    InvalidCountRecord(String),

    #[error("measurement settings are not informationally complete: missing {0}")]
    NotInformationallyComplete(String),

    #[error("maximum-likelihood iteration did not converge within {0} iterations")]
    NotConverged(usize),

    #[error("bootstrap failed: {0}")]
    Bootstrap(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
