//! Random processes driving the uplink: private and common channel gains,
//! common-channel access and harvested energy.

mod gain;
mod harvest;
mod markov;

pub use gain::{discretize_gain, sample_access, sample_gain, AccessModel, EqualProbabilityBins, GainDistribution};
pub use harvest::{eh_preset, make_eh_preset, EhModelPreset, EhPreset, EhPresetParams, HarvestModel};
pub use markov::MarkovChain;

pub(crate) use markov::sample_index;
