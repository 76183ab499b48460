use alloc::string::String;
use alloc::vec::Vec;

/// Errors raised while building or evaluating a model.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("parameter `{name}` = {value} is outside its domain: {reason}")]
    ParameterDomain {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("operation requires {required}, but the model does not provide it")]
    Unsupported { required: &'static str },
    #[error("non-finite value while evaluating {what}")]
    NonFinite { what: &'static str },
    #[error("model check failed: {0}")]
    Check(String),
}

/// What went wrong inside a single step.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StepFailure {
    #[error("non-finite coefficient or state")]
    NonFinite,
    #[error("Newton iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NewtonDiverged { iterations: usize, residual: f64 },
    #[error("singular linear system")]
    Singular,
    #[error("the scheme needs {0}, which the model does not provide")]
    Missing(&'static str),
    #[error("invalid step input: {0}")]
    Precondition(&'static str),
}

/// A failed step together with the state it started from.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("step {step:?} failed at eta = {eta:e}: {failure}")]
pub struct StepError {
    pub failure: StepFailure,
    /// Step index, filled in by the path driver.
    pub step: Option<usize>,
    pub eta: f64,
    pub direction: Vec<f64>,
}

impl StepError {
    pub fn new(failure: StepFailure, eta: f64, direction: &[f64]) -> Self {
        Self {
            failure,
            step: None,
            eta,
            direction: direction.to_vec(),
        }
    }

    pub fn bare(failure: StepFailure) -> Self {
        Self {
            failure,
            step: None,
            eta: f64::NAN,
            direction: Vec::new(),
        }
    }

    pub fn at_step(mut self, n: usize) -> Self {
        self.step = Some(n);
        self
    }
}

/// Errors from the estimators and the path driver.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EstimateError {
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("value {0:e} must be strictly positive")]
    NonPositive(f64),
    #[error("horizon {horizon} is not an integer multiple of the step {dt}")]
    Grid { horizon: f64, dt: f64 },
    #[error("norm is zero or negative; the Lyapunov rate is undefined")]
    UndefinedRate,
    #[error(transparent)]
    Model(#[from] ModelError),
}
