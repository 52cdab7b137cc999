use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: String, reason: String },

    #[error("unknown recipe `{0}`")]
    UnknownRecipe(String),

    #[error("unknown parameter `{key}` for recipe `{recipe}`")]
    UnknownParameter { recipe: String, key: String },

    #[error("missing parameter `{key}` for recipe `{recipe}`")]
    MissingParameter { recipe: String, key: String },

    #[error("grid too coarse: {points_per_width:.2} points per width (need at least 8)")]
    Unresolved { points_per_width: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("method {method} incompatible with {dimension}D grid")]
    MethodMismatch { method: &'static str, dimension: usize },

    #[error("blow-up at step {step} (t = {time}): {reason}")]
    BlowUp { step: usize, time: f64, reason: String },

    #[error("Picard iteration did not converge at step {step} after {iterations} iterations (change {change:e})")]
    Picard {
        step: usize,
        iterations: usize,
        change: f64,
    },

    #[error("radius {radius} outside grid interior ({lo}, {hi})")]
    RadiusOutside { radius: f64, lo: f64, hi: f64 },

    #[error("under-resolved phase: jump {jump:.3} at node {node}, snapshot {snapshot}")]
    PhaseJump { node: usize, snapshot: usize, jump: f64 },

    #[error("invalid box: {0}")]
    BadBox(String),

    #[error("shooting failed: {0}")]
    Shooting(String),

    #[error("no bracket: {0}")]
    NoBracket(String),

    #[error("{0}")]
    Unsupported(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(name: &str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name: name.to_string(),
            reason: reason.into(),
        }
    }
}
