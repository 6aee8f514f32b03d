use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::models::{sample_access, sample_gain, sample_index, GainDistribution};
use crate::system::SystemModel;

/// Independent random streams, one per physical process, so that runs
/// differing only in policy or in one model see the same draws elsewhere.
#[derive(Debug, Clone)]
pub(crate) struct Streams {
    pub access: ChaCha8Rng,
    pub private: ChaCha8Rng,
    pub common: ChaCha8Rng,
    pub harvest: ChaCha8Rng,
}

impl Streams {
    pub fn new(seed: u64, replication: u64) -> Self {
        let stream = |k: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(replication * 4 + k);
            rng
        };
        Self {
            access: stream(0),
            private: stream(1),
            common: stream(2),
            harvest: stream(3),
        }
    }
}

/// Exogenous draws of one slot.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Slot {
    pub phi: bool,
    pub h: f64,
    pub h_common: f64,
    /// Harvest index of this slot; known only at its end.
    pub e_next: usize,
}

/// Evolving exogenous state of one replication plus the battery.
#[derive(Debug, Clone)]
pub(crate) struct World<'m> {
    pub model: &'m SystemModel,
    streams: Streams,
    /// Private chain state of the previous slot, for Markov gains.
    h_state: Option<usize>,
    /// Harvest index of the previous slot.
    pub e_idx: usize,
    pub battery_units: u64,
    pub cap_units: u64,
}

impl<'m> World<'m> {
    /// Fresh replication. The first period's battery holds one harvest draw,
    /// as if a transmission had just ended.
    pub fn new(model: &'m SystemModel, seed: u64, replication: u64) -> Self {
        let mut streams = Streams::new(seed, replication);
        let h_state = match model.private() {
            GainDistribution::Markov(chain) => {
                let pi = chain.stationary_distribution().expect("validated chain");
                Some(sample_index(&pi, &mut streams.private))
            }
            _ => None,
        };
        let chain = model.harvest().chain();
        let pi = chain.stationary_distribution().expect("validated chain");
        let e_before = sample_index(&pi, &mut streams.harvest);
        let e_idx = chain.sample_next(e_before, &mut streams.harvest);
        let cap_units = model.b_max_units() as u64;
        let battery_units = (model.harvest().units()[e_idx] as u64).min(cap_units);
        Self {
            model,
            streams,
            h_state,
            e_idx,
            battery_units,
            cap_units,
        }
    }

    pub fn draw_slot(&mut self) -> Slot {
        let phi = sample_access(self.model.access(), &mut self.streams.access);
        let h = match (self.model.private(), self.h_state.as_mut()) {
            (GainDistribution::Markov(chain), Some(state)) => {
                *state = chain.sample_next(*state, &mut self.streams.private);
                chain.value(*state)
            }
            (dist, _) => sample_gain(dist, &mut self.streams.private),
        };
        let h_common = sample_gain(self.model.common(), &mut self.streams.common);
        let e_next = self
            .model
            .harvest()
            .chain()
            .sample_next(self.e_idx, &mut self.streams.harvest);
        Slot {
            phi,
            h,
            h_common,
            e_next,
        }
    }

    pub fn harvest_units(&self, e: usize) -> u64 {
        self.model.harvest().units()[e] as u64
    }

    pub fn e_prev_energy(&self) -> f64 {
        self.model.harvest().chain().value(self.e_idx)
    }
}
