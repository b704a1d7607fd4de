use thiserror::Error;

use crate::topology::Violation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {}", format_violations(.0))]
    InvalidGraph(Vec<Violation>),

    /// `witness` holds 0-based vertices; the message prints them 1-based.
    #[error("graph is not bipartite; odd cycle through vertices {}", format_cycle(.witness))]
    OddCycle { witness: Vec<usize> },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("basis mismatch: expected (n={expected_n}, N_max={expected_max}), got (n={got_n}, N_max={got_max})")]
    BasisMismatch {
        expected_n: usize,
        expected_max: usize,
        got_n: usize,
        got_max: usize,
    },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("superoperator dimension {dim} exceeds cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("integration unstable: {0}")]
    Unstable(String),

    #[error("long-time integration did not converge by t = {t_cap} (residual {residual:e})")]
    NotConverged { t_cap: f64, residual: f64 },

    #[error("eigensolver failure: {0}")]
    Eigen(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Unstable(_) | Error::NotConverged { .. } | Error::Eigen(_) | Error::DimensionCap { .. }
        )
    }
}

fn format_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

fn format_cycle(w: &[usize]) -> String {
    w.iter().map(|v| (v + 1).to_string()).collect::<Vec<_>>().join("-")
}
