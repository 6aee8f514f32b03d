//! Optimal stopping policies: the state-dependent rule for Markov dynamics
//! and the pure rate threshold for i.i.d. dynamics.

mod config;
mod evaluate;
mod markov;
mod search;
mod space;
mod threshold;
mod value;

pub use config::SolverConfig;
pub use markov::{evaluate_table, solve_markov};
pub use search::{golden_section_max, grid_scan};
pub use space::{GridState, StateSpace};
pub use threshold::{evaluate_threshold, optimize_threshold, threshold_search, ThresholdPolicy, ThresholdSearch};
pub use value::{dp_decide, value_iteration, Decision, SolveReport, ValueTable};
