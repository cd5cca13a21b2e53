use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot build a state from the zero vector")]
    ZeroVector,

    #[error("non-physical input: {0}")]
    NonPhysical(String),

    #[error("invalid input: {0}")]
    InvalidSpec(String),

    #[error("rotating frame requires drive frequency {expected}, got {got}")]
    UnsupportedFrame { expected: f64, got: f64 },

    #[error("driven phase must be moved to the rotating frame first")]
    RequiresRotatingFrame,

    #[error("no unique steady state (relaxation rate is zero)")]
    NoUniqueSteadyState,

    #[error("step size underflow at t = {t} (h = {h:e}); problem looks stiff")]
    Stiffness { t: f64, h: f64 },

    #[error("outside formula domain: {0}")]
    Domain(String),

    #[error("qubit frequency vanishes: {0}")]
    ZeroQubitFrequency(String),

    #[error("no solution: {0}")]
    NoSolution(String),

    #[error("approximation out of range: {0}")]
    ApproximationOutOfRange(String),

    #[error("dispersive regime violated: {}", .0.join("; "))]
    DispersiveRegime(Vec<String>),

    #[error("missing parameter: {0}")]
    MissingParameter(String),

    #[error("division by zero: {0}")]
    Division(String),

    #[error("concurrence profile is not unimodal on the bounds; refine the range")]
    NotUnimodal { scan: Vec<(f64, f64)> },

    #[error("every sweep point failed (first error: {0})")]
    SweepFailed(String),

    #[error("unknown knob `{0}`")]
    UnknownKnob(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
