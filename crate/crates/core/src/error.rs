use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (relative asymmetry {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:.3e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },

    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("device is incomplete: ||sum_s M_s^dag M_s - 1||_F = {defect:.6e} exceeds tolerance {tolerance:.3e}")]
    IncompleteDevice { defect: f64, tolerance: f64 },

    #[error("outcome {outcome} out of range 1..={count}")]
    OutcomeOutOfRange { outcome: usize, count: usize },

    #[error("outcome {outcome} has probability {probability:.3e}, at or below the floor")]
    ZeroProbabilityOutcome { outcome: usize, probability: f64 },

    #[error("outcome {outcome} has negative probability {probability:.3e}")]
    NegativeProbability { outcome: usize, probability: f64 },

    #[error("state is not normalized (norm {norm:.15})")]
    NotNormalized { norm: f64 },

    #[error("operator for outcome {outcome} is not unitary (defect {defect:.3e})")]
    NotUnitary { outcome: usize, defect: f64 },

    #[error("matrix contains a non-finite entry")]
    NonFinite,

    #[error("empty device: at least one Kraus operator is required")]
    EmptyDevice,

    #[error("value out of domain: {0}")]
    OutOfDomain(String),
}
