use thiserror::Error;

/// Errors raised by model construction, transforms, spectral routines and the
/// experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("duplicate spike value {0}; merge duplicates into a multiplicity")]
    DegenerateSpikes(f64),

    #[error("dimension error: {0}")]
    DimensionError(String),

    #[error("invalid bulk spectrum: {0}")]
    InvalidBulk(String),

    #[error("spike {0} lies inside the bulk range [{1}, {2}]")]
    SpikeInsideBulk(f64, f64, f64),

    #[error("evaluation point {0} coincides with a bulk atom")]
    SingularityError(f64),

    #[error("student-t with {0} degrees of freedom violates the tail condition (need dof >= 5)")]
    TailConditionError(f64),

    #[error("basis is not orthonormal (max deviation {0:.3e})")]
    InvalidBasis(f64),

    #[error("z = {0} lies inside the limiting spectral support")]
    InsideSupportError(f64),

    #[error("no real root on the admissible branch at z = {0}")]
    BranchError(f64),

    #[error("every eigenvalue was excluded as a near-multiple root; no bulk left")]
    NoBulkError,

    #[error("empirical companion transform vanished; spike estimate diverges")]
    DivergentEstimate,

    #[error("matrix not symmetric (max asymmetry {0:.3e})")]
    SymmetryError(f64),

    #[error("vector not unit norm (norm {0})")]
    InvalidVector(f64),

    #[error("spike {0} is not detectable (psi'(d^2) = {1} <= 0)")]
    SpikeNotDetectable(f64, f64),

    #[error("index error: {0}")]
    IndexError(String),

    #[error("non-positive or non-finite test variance {0}")]
    VarianceError(f64),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("internal error: {0}")]
    InternalError(String),

    #[error("eigendecomposition failed to converge")]
    EigenFailure,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by invalid user input (models, configs, data),
    /// as opposed to runtime failures.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io(_) | Error::Json(_) | Error::InternalError(_) | Error::EigenFailure)
    }
}

pub type Result<T> = std::result::Result<T, Error>;
