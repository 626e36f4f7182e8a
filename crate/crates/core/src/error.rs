use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("basis mismatch: {0}")]
    BasisMismatch(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("eigensolver did not converge after {iterations} restarts (worst residual {worst:.3e})")]
    NoConvergence {
        iterations: usize,
        worst: f64,
        residuals: Vec<f64>,
    },

    #[error("dimension {dim} exceeds the dense limit {limit}")]
    TooLarge { dim: usize, limit: usize },

    #[error("solve failed at point {point:?}: {source}")]
    PointFailure {
        point: Vec<f64>,
        #[source]
        source: Box<Error>,
    },

    #[error("ground density leaks to the grid edge: weight {weight:.3e} exceeds {threshold:.1e}")]
    Unbound { weight: f64, threshold: f64 },

    #[error("singular control inversion at t = {time:.5}: |<sigma_x>| = {value:.3e}")]
    SingularInversion { time: f64, value: f64 },

    #[error("control inversion did not converge at t = {time:.5} (residuals {history:?})")]
    InversionNoConvergence { time: f64, history: Vec<f64> },

    #[error("time step {dt} too large: dt*E_max = {product:.3} exceeds {limit}")]
    StepSize { dt: f64, product: f64, limit: f64 },

    #[error("insufficient states: {0}")]
    InsufficientStates(String),

    #[error("second moments were not retained for this trajectory step")]
    MissingMoments,

    #[error("unknown model: {0}")]
    UnknownModel(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name: name.to_string(),
        reason: reason.into(),
    }
}
