//! Save-then-transmit policies for an energy-harvesting uplink with a
//! private channel and an opportunistically secured common channel.
//!
//! The transmitter stores harvested energy and spends the whole battery in
//! one slot. [`solver::solve_markov`] finds the throughput-optimal stopping
//! rule when channel and harvest evolve as Markov chains;
//! [`solver::optimize_threshold`] tunes the pure rate threshold that is
//! optimal when they are i.i.d. [`sim`] measures either policy, and the
//! best-effort and conventional-supply baselines, by slot-level Monte Carlo.

pub mod error;
pub mod models;
pub mod power;
pub mod presets;
pub mod sim;
pub mod solver;
pub mod state;
pub mod system;

mod special;

pub use error::{Error, Result};
pub use state::SystemState;
pub use system::SystemModel;

// The guide's snippets run as doc-tests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/models.md")]
    mod models {}
    #[doc = include_str!("../../../book/src/power.md")]
    mod power {}
    #[doc = include_str!("../../../book/src/stopping.md")]
    mod stopping {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
