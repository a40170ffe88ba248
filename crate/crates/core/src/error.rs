use thiserror::Error;

/// Errors produced by the integrators, verifiers and harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown method `{name}`; available: {available}")]
    UnknownMethod { name: String, available: String },

    #[error("unknown problem `{name}`; available: {available}")]
    UnknownProblem { name: String, available: String },

    #[error("invalid tableau: {0}")]
    InvalidTableau(String),

    #[error("fully implicit base tableaus are not supported (method `{0}`)")]
    FullyImplicit(String),

    #[error("singular matrix in {0}")]
    Singular(&'static str),

    #[error("zero diagonal entry a[{index},{index}] makes {context} undefined")]
    SingularDiagonal { index: usize, context: &'static str },

    #[error("Newton iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NewtonFailure { iterations: usize, residual: f64 },

    #[error("inner step size underflow at theta = {theta:e}")]
    StepSizeUnderflow { theta: f64 },

    #[error("inner solver exceeded {max_steps} steps at theta = {theta:e}")]
    TooManySteps { max_steps: usize, theta: f64 },

    #[error("non-positive state component {index} = {value:e}")]
    NonPositiveState { index: usize, value: f64 },

    #[error("step {index} at t = {t}: {source}")]
    Step {
        index: usize,
        t: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
