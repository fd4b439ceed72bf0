use thiserror::Error;

use crate::coefficients::ValidationReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid discretization: {0}")]
    InvalidGrid(String),

    #[error("fields live on different discretizations")]
    MismatchedGrids,

    #[error("unknown profile `{0}`")]
    UnknownProfile(String),

    #[error("unknown coefficient family `{0}`")]
    UnknownFamily(String),

    #[error("`{name}` expects {expected} parameter(s), got {got}")]
    Arity {
        name: String,
        expected: usize,
        got: usize,
    },

    #[error("{family} does not provide derivative order {order} for `{role}`")]
    UnsupportedOrder {
        family: String,
        role: &'static str,
        order: usize,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("coefficient hypotheses violated: {}", .0.summary())]
    Hypotheses(Box<ValidationReport>),

    #[error("linear solver did not converge: relative residual {residual:.3e} after {iterations} iterations")]
    LinearSolver { residual: f64, iterations: usize },

    #[error("{stage} failed at time level {level}: {source}")]
    AtLevel {
        stage: &'static str,
        level: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("Newton iteration did not converge: residual {residual:.3e} after {iterations} iterations")]
    Newton { residual: f64, iterations: usize },

    #[error("csv: {0}")]
    Csv(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of the numerical machinery (as opposed to bad input).
    pub fn is_solver_failure(&self) -> bool {
        match self {
            Error::LinearSolver { .. } | Error::Newton { .. } => true,
            Error::AtLevel { source, .. } => source.is_solver_failure(),
            _ => false,
        }
    }
}
