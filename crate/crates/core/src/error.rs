use thiserror::Error;

/// Errors produced by the numerical laboratory.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("{name} must be strictly positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },

    #[error("cannot convert between {from} and {to}: incompatible dimensions")]
    IncompatibleUnits { from: &'static str, to: &'static str },

    #[error("zero momentum transfer hits the Coulomb singularity; impose a gap or regularization")]
    CoulombSingularity,

    #[error("grid too coarse: {0}")]
    Resolution(String),

    #[error("grid does not cover the required support: {0}")]
    Coverage(String),

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("invalid projector: {0}")]
    InvalidProjector(String),

    #[error("position windows overlap; projectors are not mutually orthogonal")]
    OverlappingWindows,

    #[error("hidden-variable model invalid: {0}")]
    InvalidModel(String),

    #[error("no propagating stationary point: energy must be positive, got {0}")]
    NoPropagatingPoint(f64),

    #[error("degenerate stationary point: x1 = X1 and xi1 = 0 collapse the expansion")]
    DegenerateStationaryPoint,

    #[error("energy bin {bin} is below the resolvable width {min}")]
    RateBinTooNarrow { bin: f64, min: f64 },

    #[error("wavelength {wavelength} inconsistent with mass and speed (expected {expected})")]
    InconsistentWavelength { wavelength: f64, expected: f64 },

    #[error("scenario key `{key}`: {reason}")]
    Scenario { key: String, reason: String },

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;

impl CoreError {
    pub fn non_positive(name: &'static str, value: f64) -> Self {
        CoreError::NonPositive { name, value }
    }
}
