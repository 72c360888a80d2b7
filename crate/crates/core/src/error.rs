use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FiberError {
    #[error("invalid spin j = {0}: must be a positive half-integer")]
    InvalidSpin(f64),

    #[error("non-finite matrix entry in {0}")]
    NumericDomain(&'static str),

    #[error("vector norm {norm} is not 1 (tolerance {tolerance:e})")]
    NotNormalized { norm: f64, tolerance: f64 },

    #[error("invalid fiber path: {0}")]
    InvalidPath(String),

    #[error("path has a tangent discontinuity of {angle} rad at sample {index}")]
    Kinked { index: usize, angle: f64 },

    #[error("path has zero length")]
    DegeneratePath,

    #[error("helix with zero radius and zero pitch has no rotation frequency")]
    DegenerateHelix,

    #[error("momentum direction reaches the south pole (k_z = -1) at t = {t}; the phase convention is undefined there")]
    SouthPole { t: f64 },

    #[error("wavenumber must be positive, got {0}")]
    InvalidWavenumber(f64),

    #[error("helicity vector K vanishes; helicity is undefined")]
    UndefinedHelicity,

    #[error("sigma = {sigma} is not an eigenvalue for spin j = {j}")]
    InvalidSigma { sigma: f64, j: f64 },

    #[error("time {t} is outside the trajectory range [0, {duration}]")]
    TimeOutOfRange { t: f64, duration: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl FiberError {
    /// Short stable identifier for structured error output.
    pub fn kind(&self) -> &'static str {
        match self {
            FiberError::InvalidSpin(_) => "invalid_spin",
            FiberError::NumericDomain(_) => "numeric_domain",
            FiberError::NotNormalized { .. } => "not_normalized",
            FiberError::InvalidPath(_) => "invalid_path",
            FiberError::Kinked { .. } => "kinked_path",
            FiberError::DegeneratePath => "degenerate_path",
            FiberError::DegenerateHelix => "degenerate_helix",
            FiberError::SouthPole { .. } => "south_pole",
            FiberError::InvalidWavenumber(_) => "invalid_wavenumber",
            FiberError::UndefinedHelicity => "undefined_helicity",
            FiberError::InvalidSigma { .. } => "invalid_sigma",
            FiberError::TimeOutOfRange { .. } => "time_out_of_range",
            FiberError::InvalidArgument(_) => "invalid_argument",
        }
    }

    /// Errors caused by out-of-range input values rather than by the numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            FiberError::InvalidSpin(_)
                | FiberError::InvalidPath(_)
                | FiberError::InvalidWavenumber(_)
                | FiberError::InvalidSigma { .. }
                | FiberError::InvalidArgument(_)
                | FiberError::DegenerateHelix
        )
    }
}

pub type Result<T> = std::result::Result<T, FiberError>;
