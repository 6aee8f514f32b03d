//! The two reference uplinks used throughout the experiments.
//!
//! Energies are in units of the step `delta`; with 1 ms slots and a 1 mJ
//! step, one step spent in one slot is one unit of power.

use crate::error::Result;
use crate::models::{eh_preset, AccessModel, EhPreset, EhPresetParams, GainDistribution, HarvestModel, MarkovChain};
use crate::system::SystemModel;

/// Private gain BAD state.
pub const BAD_GAIN: f64 = 0.1;
/// Private gain GOOD state, 2^4.
pub const GOOD_GAIN: f64 = 16.0;
/// Static common-channel gain, 2^5.
pub const COMMON_GAIN: f64 = 32.0;
/// Battery capacity of the Markov uplink: one unit of energy.
pub const MARKOV_B_MAX_UNITS: u32 = 1_000;
/// Stand-in for an unbounded battery.
pub const LARGE_B_MAX_UNITS: u32 = 10_000;

/// Private chain {0.1, 16}: BAD always recovers, GOOD degrades w.p. 1/2.
pub fn markov_private_chain() -> MarkovChain {
    MarkovChain::two_state([BAD_GAIN, GOOD_GAIN], 1.0, 0.5).expect("valid chain")
}

/// Time-correlated private channel, constant harvest of one step per slot,
/// static common channel.
pub fn markov_uplink(p_s: f64, delta: f64, b_max_units: u32) -> Result<SystemModel> {
    SystemModel::new(
        GainDistribution::Markov(markov_private_chain()),
        GainDistribution::constant(COMMON_GAIN)?,
        AccessModel::new(p_s)?,
        HarvestModel::new(MarkovChain::constant(delta)?, delta)?,
        delta,
        b_max_units,
    )
}

/// Unit-mean exponential private and common gains with the given harvest
/// process.
pub fn iid_uplink_with(p_s: f64, harvest: HarvestModel, delta: f64, b_max_units: u32) -> Result<SystemModel> {
    let exp = GainDistribution::exponential(1.0)?;
    SystemModel::new(exp.clone(), exp, AccessModel::new(p_s)?, harvest, delta, b_max_units)
}

/// [`iid_uplink_with`] harvesting 0 or 4 steps with probability 1/2 each.
pub fn iid_uplink(p_s: f64, delta: f64, b_max_units: u32) -> Result<SystemModel> {
    let harvest = eh_preset(EhPreset::A, &EhPresetParams::default(), delta)?.harvest_model(delta)?;
    iid_uplink_with(p_s, harvest, delta, b_max_units)
}
