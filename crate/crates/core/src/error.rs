use std::path::PathBuf;

/// Errors produced anywhere in the solver stack.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Geometry or problem setup that cannot be discretized.
    #[error("configuration error: {0}")]
    Config(String),

    /// A function argument outside its admissible range.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// Quadrature, norm or other numerical failure.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// Sparse assembly failed (e.g. a non-finite field sample).
    #[error("assembly error: {0}")]
    Assembly(String),

    /// A linear solve did not reach the requested residual.
    #[error("linear solve failed: {reason} (residual {residual:e})")]
    Solve { reason: String, residual: f64 },

    /// A time step failed; carries the step index inside an integration.
    #[error("step {step} failed: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    /// The brute-force oracle became unstable.
    #[error("oracle unstable at t = {t}: norm {norm:e} exceeds bound, reduce dt_sub")]
    OracleUnstable { t: f64, norm: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn at_step(self, step: usize) -> Self {
        Error::Step {
            step,
            source: Box::new(self),
        }
    }
}
