use thiserror::Error;

/// Errors raised anywhere in the solver pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("integrand is not finite at abscissa {abscissa}")]
    NonFiniteIntegrand { abscissa: f64 },

    #[error("adaptive quadrature hit the {panels}-panel limit (estimated error {error:e})")]
    QuadratureConvergence {
        panels: usize,
        error: f64,
        estimate: Vec<f64>,
    },

    #[error("history quadrature failed on interval {interval}: {source}")]
    History {
        interval: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("singular linear system while advancing interval {interval}")]
    SingularSystem { interval: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("adaptation did not converge on interval {interval} after {iterations} trials")]
    Adaptation {
        interval: usize,
        iterations: usize,
        trace: Vec<(f64, bool)>,
    },

    #[error(
        "time step underflow on interval {interval} (trial step {tau:e}); double precision \
         cannot represent the step required for alpha = {alpha} and TOL = {tol:e}"
    )]
    Precision {
        interval: usize,
        tau: f64,
        alpha: f64,
        tol: f64,
    },

    #[error("run stopped after {intervals} intervals at t = {t_reached:e}: {reason}")]
    Budget {
        intervals: usize,
        t_reached: f64,
        reason: String,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
