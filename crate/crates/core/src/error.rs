use thiserror::Error;

pub type Result<T, E = RabiError> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RabiError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("x = {x} lies too close to the pole at {pole}")]
    PoleProximity { x: f64, pole: u32 },

    #[error("coupling g is zero; use the decoupled closed form")]
    ZeroCoupling,

    #[error("spectral series at x = {x} did not converge within {n_cap} terms")]
    SeriesNoConverge { x: f64, n_cap: usize },

    #[error("non-finite spectral function value at x = {x}")]
    NonFinite { x: f64 },

    #[error("bracket [{lo}, {hi}] has no sign change")]
    BracketInvalid { lo: f64, hi: f64 },

    #[error("refined root at x = {x} has relative residual {residual:e}")]
    RootResidual { x: f64, residual: f64 },

    #[error("no spectral root found in [{lo}, {hi}]")]
    NoRootFound { lo: f64, hi: f64 },

    #[error("branch coefficients did not decay below {threshold:e} of their peak within {n_cap} terms")]
    TailDivergence { n_cap: usize, threshold: f64 },

    #[error("frame displacement mismatch: {left} vs {right}")]
    FrameMismatch { left: f64, right: f64 },

    #[error("branch states come from different spectral roots")]
    RootMismatch,

    #[error("x-p covariance {cov:e} breaks the angle-resolved variance formula")]
    CrossTermViolation { cov: f64 },

    #[error("eigensolver failed: {0}")]
    ConvergenceFailure(String),

    #[error("grid incomplete, offending g columns: {columns:?}")]
    GridIncomplete { columns: Vec<f64> },

    #[error("quadratic fit is rank deficient")]
    DegenerateFit,

    #[error("unknown field `{0}`")]
    UnknownField(String),

    #[error("records do not form a rectangular grid: {0}")]
    NonRectangularGrid(String),

    #[error("config: {0}")]
    Config(String),

    #[error("format: {0}")]
    Format(String),

    #[error("io: {0}")]
    Io(String),
}

impl RabiError {
    /// Stable machine-readable tag, used in CSV error columns and CLI output.
    pub fn code(&self) -> &'static str {
        match self {
            RabiError::InvalidParams(_) => "invalid_params",
            RabiError::PoleProximity { .. } => "pole_proximity",
            RabiError::ZeroCoupling => "zero_coupling",
            RabiError::SeriesNoConverge { .. } => "series_no_converge",
            RabiError::NonFinite { .. } => "non_finite",
            RabiError::BracketInvalid { .. } => "bracket_invalid",
            RabiError::RootResidual { .. } => "root_residual",
            RabiError::NoRootFound { .. } => "no_root_found",
            RabiError::TailDivergence { .. } => "tail_divergence",
            RabiError::FrameMismatch { .. } => "frame_mismatch",
            RabiError::RootMismatch => "root_mismatch",
            RabiError::CrossTermViolation { .. } => "cross_term_violation",
            RabiError::ConvergenceFailure(_) => "convergence_failure",
            RabiError::GridIncomplete { .. } => "grid_incomplete",
            RabiError::DegenerateFit => "degenerate_fit",
            RabiError::UnknownField(_) => "unknown_field",
            RabiError::NonRectangularGrid(_) => "non_rectangular_grid",
            RabiError::Config(_) => "config",
            RabiError::Format(_) => "format",
            RabiError::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for RabiError {
    fn from(e: std::io::Error) -> Self {
        RabiError::Io(e.to_string())
    }
}

impl From<csv::Error> for RabiError {
    fn from(e: csv::Error) -> Self {
        RabiError::Format(e.to_string())
    }
}
