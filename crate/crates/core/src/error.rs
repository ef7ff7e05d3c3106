use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Validation(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("missing half-hour record at {0}")]
    DemandGap(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed linear program: {0}")]
    MalformedLp(String),

    #[error("LP solver failure: {0}")]
    SolverFailure(String),

    #[error("unit commitment infeasible at hour {hour}: demand {demand_mw:.3} MW exceeds available {available_mw:.3} MW")]
    UcpInfeasible {
        hour: usize,
        demand_mw: f64,
        available_mw: f64,
    },

    #[error("unit commitment LP has no feasible dispatch")]
    UcpLpInfeasible,

    #[error("session {id} cannot be served: needs {demand_kwh:.4} kWh but its window allows at most {max_kwh:.4} kWh")]
    SessionInfeasible {
        id: usize,
        demand_kwh: f64,
        max_kwh: f64,
    },

    #[error("station capacity overloaded at step {step}")]
    CapacityInfeasible { step: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("covariance factorization failed: {0}")]
    Factorization(String),

    #[error("run {run} failed during {stage}: {source}")]
    Run {
        run: usize,
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("config: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn in_run(self, run: usize, stage: &'static str) -> Self {
        Error::Run {
            run,
            stage,
            source: Box::new(self),
        }
    }
}
