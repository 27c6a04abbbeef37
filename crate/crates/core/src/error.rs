use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum GchError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("field length {got} does not match grid size {expected}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("non-finite values in field")]
    NonFinite,

    #[error("inapplicable: {0}")]
    Inapplicable(String),

    #[error("flow gradient q_x = {qx} <= 0 at label x = {label} (t = {t})")]
    NonPositiveFlowGradient { label: f64, qx: f64, t: f64 },

    #[error(
        "momentum support escapes the window: |y| = {value} at x = {x} exceeds tolerance {tol}"
    )]
    SupportEscape { x: f64, value: f64, tol: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("unknown kind: {0}")]
    UnknownKind(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, GchError>;
