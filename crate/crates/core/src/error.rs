use thiserror::Error;

use crate::ambient::FieldKind;

#[derive(Debug, Error)]
pub enum HypflowError {
    #[error("dimension too small: {field}H^n needs n >= {min}, got n = {n}")]
    DimensionTooSmall { field: FieldKind, n: usize, min: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("speed function `{label}` is not finite at x = {x:e}")]
    NonFiniteSpeed { label: String, x: f64 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("numeric blow-up in {quantity} at node {node}")]
    NumericBlowup { node: usize, quantity: &'static str },

    #[error("flow breakdown: mean convexity lost at node {node} (H = {h:e})")]
    MeanConvexity { node: usize, h: f64 },

    #[error("time step {dt:e} exceeds the stability bound {bound:e}")]
    Stability { dt: f64, bound: f64 },

    #[error("step rejected: {0}")]
    StepRejected(String),

    #[error("maximum number of steps ({0}) exceeded")]
    MaxSteps(usize),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("wrong field: {0}")]
    WrongField(String),

    #[error("fit error: {0}")]
    Fit(String),

    #[error("root finding failed: {0}")]
    RootFind(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl HypflowError {
    /// True for failures of the numerical evolution itself (as opposed to bad input).
    pub fn is_breakdown(&self) -> bool {
        matches!(
            self,
            HypflowError::NumericBlowup { .. }
                | HypflowError::MeanConvexity { .. }
                | HypflowError::Stability { .. }
                | HypflowError::StepRejected(_)
                | HypflowError::MaxSteps(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, HypflowError>;
