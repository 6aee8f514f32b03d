use thiserror::Error;

/// Errors raised by model construction, the solvers and the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("Markov chain has no unique stationary distribution ({closed_classes} closed classes)")]
    ReducibleChain { closed_classes: usize },

    #[error("unknown EH preset `{0}` (expected one of a, b, c, d)")]
    BadName(String),

    #[error("unsupported distribution kind for {0}")]
    UnsupportedKind(&'static str),

    #[error("energy budget must be positive, got {0}")]
    NonpositiveBudget(f64),

    #[error("common-channel power {0} assigned while the common channel is not held")]
    InconsistentSplit(f64),

    #[error("water level cannot bracket average power {p_bar}")]
    NoBracket { p_bar: f64 },

    #[error("{what} did not converge after {iterations} iterations (last change {residual:e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("saving period exceeded the cap of {cap} slots (threshold unreachable?)")]
    PeriodOverflow { cap: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;
