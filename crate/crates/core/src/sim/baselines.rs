use rayon::prelude::*;

use super::metrics::{BatchSums, Metrics};
use super::world::World;
use super::{split_evenly, SimOptions};
use crate::error::{Error, Result};
use crate::power::{conventional_power, solve_water_level, stop_rate, WaterLevel};
use crate::system::SystemModel;

/// Best-effort delivery: every slot spends exactly what was harvested in
/// the previous slot, split across both channels when the common channel
/// is held. Throughput is the per-slot average rate.
pub fn run_best_effort(model: &SystemModel, n_slots: u64, seed: u64, opts: &SimOptions) -> Result<Metrics> {
    if n_slots == 0 {
        return Err(Error::InvalidModel("need at least one slot".into()));
    }
    let delta = model.delta();
    let unit = model.rate_unit();
    let sums: Vec<BatchSums> = split_evenly(n_slots, opts.batches)
        .par_iter()
        .enumerate()
        .map(|(rep, &count)| {
            let mut world = World::new(model, seed, rep as u64);
            let mut sums = BatchSums::default();
            for i in 0..opts.warmup_slots + count {
                let slot = world.draw_slot();
                let budget = world.harvest_units(world.e_idx) as f64 * delta;
                let rate = stop_rate(budget, slot.h, slot.h_common, slot.phi, unit);
                world.e_idx = slot.e_next;
                if i >= opts.warmup_slots {
                    sums.reward += rate;
                    sums.slots += 1;
                    sums.periods += 1;
                }
            }
            sums
        })
        .collect();
    Ok(Metrics::from_batches(&sums, false))
}

/// Conventional supply with average power `p_bar`: water-filling over the
/// private channel and, when held, the common channel. The water level is
/// solved exactly from the channel statistics; the reported average power
/// is the realized one.
pub fn run_conventional(
    model: &SystemModel,
    p_bar: f64,
    n_slots: u64,
    seed: u64,
    opts: &SimOptions,
) -> Result<Metrics> {
    let level = solve_water_level(model.private(), model.common(), model.access(), p_bar)?;
    run_conventional_at(model, level, n_slots, seed, opts)
}

pub(crate) fn run_conventional_at(
    model: &SystemModel,
    level: WaterLevel,
    n_slots: u64,
    seed: u64,
    opts: &SimOptions,
) -> Result<Metrics> {
    if n_slots == 0 {
        return Err(Error::InvalidModel("need at least one slot".into()));
    }
    let unit = model.rate_unit();
    let sums: Vec<BatchSums> = split_evenly(n_slots, opts.batches)
        .par_iter()
        .enumerate()
        .map(|(rep, &count)| {
            let mut world = World::new(model, seed, rep as u64);
            let mut sums = BatchSums::default();
            for i in 0..opts.warmup_slots + count {
                let slot = world.draw_slot();
                world.e_idx = slot.e_next;
                let p = conventional_power(slot.h, level);
                let mut rate = unit.log1p(slot.h * p);
                let mut power = p;
                if slot.phi {
                    let pc = conventional_power(slot.h_common, level);
                    rate += unit.log1p(slot.h_common * pc);
                    power += pc;
                }
                if i >= opts.warmup_slots {
                    sums.reward += rate;
                    sums.power += power;
                    sums.slots += 1;
                    sums.periods += 1;
                }
            }
            sums
        })
        .collect();
    Ok(Metrics::from_batches(&sums, true))
}
