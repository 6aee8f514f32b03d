//! Slot-level Monte Carlo of save-then-transmit periods and of the
//! best-effort and conventional-supply baselines.
//!
//! Every run is split into independent replications, each seeded from the
//! base seed and its index. Replications run in parallel and their sums are
//! combined in index order, so results do not depend on scheduling. The
//! replications double as the batches of the reported standard errors.

mod baselines;
mod metrics;
mod world;

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::power::{rate_at_stop, WaterLevel};
use crate::solver::{Decision, SolverConfig, ValueTable};
use crate::state::SystemState;
use crate::system::SystemModel;

pub use baselines::{run_best_effort, run_conventional};
pub use metrics::Metrics;

use metrics::BatchSums;
use world::World;

/// Transmission policy.
#[derive(Debug, Clone)]
pub enum Policy {
    /// State-dependent rule from the DP solver.
    Dp(Arc<ValueTable>),
    /// Transmit at the first slot whose achievable rate reaches `gamma`.
    Threshold(f64),
    /// Spend the previous slot's harvest in every slot.
    BestEffort,
    /// Average-power water-filling with a conventional supply.
    Conventional { level: WaterLevel, p_bar: f64 },
}

impl Policy {
    fn stops(&self, state: &SystemState, rate: f64) -> Result<bool> {
        match self {
            Policy::Threshold(gamma) => Ok(rate >= *gamma),
            Policy::Dp(table) => Ok(crate::solver::dp_decide(table, state) == Decision::Stop),
            _ => Err(Error::InvalidModel(
                "renewal periods are defined for DP and threshold policies only".into(),
            )),
        }
    }
}

/// Run-length settings of the simulator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimOptions {
    pub warmup_periods: u64,
    pub warmup_slots: u64,
    pub batches: usize,
    pub period_slot_cap: u64,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            warmup_periods: 1_000,
            warmup_slots: 10_000,
            batches: 20,
            period_slot_cap: 1_000_000,
        }
    }
}

impl From<&SolverConfig> for SimOptions {
    fn from(cfg: &SolverConfig) -> Self {
        Self {
            warmup_periods: cfg.warmup_periods,
            warmup_slots: 10 * cfg.warmup_periods,
            batches: cfg.batches,
            period_slot_cap: cfg.period_slot_cap,
        }
    }
}

/// One save-then-transmit period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeriodOutcome {
    pub saving_slots: u64,
    pub stop_state: SystemState,
    pub rate_at_stop: f64,
    /// Energy spent in the transmission slot, the whole battery.
    pub energy_spent: f64,
    /// Battery at the first slot, carried over from the previous period.
    pub carried_in: f64,
    /// Energy harvested during the saving slots, before clipping.
    pub harvested: f64,
    /// Energy lost to a full battery.
    pub clipped: f64,
    /// Energy harvested during the transmission slot; the next period's start.
    pub harvest_at_stop: f64,
}

/// `min(b + e, b_max_units * delta)`.
pub fn advance_battery(b: f64, e: f64, b_max_units: u32, delta: f64) -> f64 {
    (b + e).min(b_max_units as f64 * delta)
}

fn period(policy: &Policy, world: &mut World<'_>, slot_cap: u64) -> Result<PeriodOutcome> {
    let delta = world.model.delta();
    let unit = world.model.rate_unit();
    let carried_units = world.battery_units;
    let mut harvested_units = 0u64;
    let mut clipped_units = 0u64;
    let mut t = 0u64;
    loop {
        t += 1;
        if t > slot_cap {
            return Err(Error::PeriodOverflow { cap: slot_cap });
        }
        let slot = world.draw_slot();
        let state = SystemState {
            phi: slot.phi,
            battery: world.battery_units as f64 * delta,
            e_prev: world.e_prev_energy(),
            h: slot.h,
            h_common: slot.h_common,
        };
        let rate = rate_at_stop(&state, unit);
        let e_units = world.harvest_units(slot.e_next);
        world.e_idx = slot.e_next;
        if policy.stops(&state, rate)? {
            world.battery_units = e_units.min(world.cap_units);
            return Ok(PeriodOutcome {
                saving_slots: t,
                stop_state: state,
                rate_at_stop: rate,
                energy_spent: state.battery,
                carried_in: carried_units as f64 * delta,
                harvested: harvested_units as f64 * delta,
                clipped: clipped_units as f64 * delta,
                harvest_at_stop: e_units as f64 * delta,
            });
        }
        let filled = world.battery_units + e_units;
        harvested_units += e_units;
        if filled > world.cap_units {
            clipped_units += filled - world.cap_units;
        }
        world.battery_units = filled.min(world.cap_units);
    }
}

/// Runs one period on a fresh replication stream `(seed, replication)`.
pub fn run_period(policy: &Policy, model: &SystemModel, seed: u64, replication: u64) -> Result<PeriodOutcome> {
    let mut world = World::new(model, seed, replication);
    period(policy, &mut world, SimOptions::default().period_slot_cap)
}

/// Consecutive periods of one replication, for trace inspection.
pub fn run_periods(
    policy: &Policy,
    model: &SystemModel,
    n_periods: u64,
    seed: u64,
    replication: u64,
    opts: &SimOptions,
) -> Result<Vec<PeriodOutcome>> {
    let mut world = World::new(model, seed, replication);
    (0..n_periods)
        .map(|_| period(policy, &mut world, opts.period_slot_cap))
        .collect()
}

pub(crate) fn split_evenly(total: u64, parts: usize) -> Vec<u64> {
    let parts = parts as u64;
    (0..parts)
        .map(|i| total / parts + u64::from(i < total % parts))
        .collect()
}

/// Long-run metrics over `n_periods` periods after warm-up.
pub fn run_simulation(
    policy: &Policy,
    model: &SystemModel,
    n_periods: u64,
    seed: u64,
    opts: &SimOptions,
) -> Result<Metrics> {
    run_simulation_inner(policy, model, n_periods, seed, opts, None)
}

/// Per-period record of a traced run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeriodRecord {
    pub period: u64,
    pub saving_slots: u64,
    pub battery_at_stop: f64,
    pub phi: bool,
    pub h: f64,
    pub h_common: f64,
    pub rate: f64,
}

/// [`run_simulation`] that also returns every measured period, in
/// replication order.
pub fn run_simulation_traced(
    policy: &Policy,
    model: &SystemModel,
    n_periods: u64,
    seed: u64,
    opts: &SimOptions,
) -> Result<(Metrics, Vec<PeriodRecord>)> {
    let mut trace = Vec::new();
    let metrics = run_simulation_inner(policy, model, n_periods, seed, opts, Some(&mut trace))?;
    Ok((metrics, trace))
}

fn run_simulation_inner(
    policy: &Policy,
    model: &SystemModel,
    n_periods: u64,
    seed: u64,
    opts: &SimOptions,
    trace: Option<&mut Vec<PeriodRecord>>,
) -> Result<Metrics> {
    if n_periods == 0 || opts.batches == 0 {
        return Err(Error::InvalidModel("need at least one period and one batch".into()));
    }
    // Reject baseline kinds before spawning work.
    policy.stops(&SystemState::new(false, 0.0, 0.0, 0.0, 0.0), 0.0)?;
    let keep_trace = trace.is_some();
    let counts = split_evenly(n_periods, opts.batches);
    let results: Vec<Result<(BatchSums, Vec<PeriodRecord>)>> = counts
        .par_iter()
        .enumerate()
        .map(|(rep, &count)| {
            let mut world = World::new(model, seed, rep as u64);
            for _ in 0..opts.warmup_periods {
                period(policy, &mut world, opts.period_slot_cap)?;
            }
            let mut sums = BatchSums::default();
            let mut records = Vec::new();
            for _ in 0..count {
                let out = period(policy, &mut world, opts.period_slot_cap)?;
                sums.reward += out.rate_at_stop;
                sums.slots += out.saving_slots;
                sums.periods += 1;
                sums.cap_hits += u64::from(out.clipped > 0.0);
                if keep_trace {
                    records.push(PeriodRecord {
                        period: 0,
                        saving_slots: out.saving_slots,
                        battery_at_stop: out.energy_spent,
                        phi: out.stop_state.phi,
                        h: out.stop_state.h,
                        h_common: out.stop_state.h_common,
                        rate: out.rate_at_stop,
                    });
                }
            }
            Ok((sums, records))
        })
        .collect();
    let mut sums = Vec::with_capacity(results.len());
    let mut all_records = Vec::new();
    for r in results {
        let (s, recs) = r?;
        sums.push(s);
        all_records.extend(recs);
    }
    if let Some(trace) = trace {
        for (i, rec) in all_records.iter_mut().enumerate() {
            rec.period = i as u64;
        }
        *trace = all_records;
    }
    Ok(Metrics::from_batches(&sums, false))
}
