//! Finite state space of the stopping problem.
//!
//! A slot state is `(phi, b, e, h, hc)`: access indicator, battery in energy
//! steps, index of the previous harvest, and grid indices of both gains.
//! Access and the common gain are drawn afresh every slot, so most of the
//! bookkeeping happens on the *reduced* state `(b, e, h)` observed before
//! those two are drawn.

use crate::error::{Error, Result};
use crate::models::{EqualProbabilityBins, GainDistribution};
use crate::power::{stop_rate, RateUnit};
use crate::state::SystemState;
use crate::system::SystemModel;

use super::config::SolverConfig;

const MAX_RATE_ENTRIES: usize = 60_000_000;

/// Indices of one slot state on the solver grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridState {
    pub phi: bool,
    pub b: usize,
    pub e: usize,
    pub h: usize,
    pub hc: usize,
}

#[derive(Debug, Clone)]
enum Locator {
    Nearest,
    Bins(EqualProbabilityBins),
}

/// One gain axis: grid values, how a continuous value maps onto them, and
/// the transition rows (identical rows for i.i.d. gains).
#[derive(Debug, Clone)]
pub(crate) struct Axis {
    pub values: Vec<f64>,
    pub next: Vec<Vec<(usize, f64)>>,
    pub stationary: Vec<f64>,
    locator: Locator,
}

impl Axis {
    fn from_gain(dist: &GainDistribution, bins: usize) -> Result<Self> {
        match dist {
            GainDistribution::Markov(chain) => Ok(Self {
                values: chain.states().to_vec(),
                next: sparse_rows(chain.transition()),
                stationary: chain.stationary_distribution()?,
                locator: Locator::Nearest,
            }),
            GainDistribution::Exponential { .. } => {
                let binned = EqualProbabilityBins::new(dist, bins)?;
                let p = vec![1.0 / bins as f64; bins];
                Ok(Self {
                    values: binned.representatives.clone(),
                    next: vec![sparse_row(&p); bins],
                    stationary: p,
                    locator: Locator::Bins(binned),
                })
            }
            other => {
                let (values, probs) = other.atoms()?.expect("finite support");
                Ok(Self {
                    next: vec![sparse_row(&probs); values.len()],
                    values,
                    stationary: probs,
                    locator: Locator::Nearest,
                })
            }
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn locate(&self, value: f64) -> usize {
        match &self.locator {
            Locator::Bins(bins) => bins.locate(value),
            Locator::Nearest => nearest(&self.values, value),
        }
    }
}

fn nearest(values: &[f64], x: f64) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if (v - x).abs() < (values[best] - x).abs() {
            best = i;
        }
    }
    best
}

fn sparse_row(row: &[f64]) -> Vec<(usize, f64)> {
    row.iter()
        .enumerate()
        .filter(|(_, &p)| p > 0.0)
        .map(|(j, &p)| (j, p))
        .collect()
}

fn sparse_rows(rows: &[Vec<f64>]) -> Vec<Vec<(usize, f64)>> {
    rows.iter().map(|r| sparse_row(r)).collect()
}

/// Discretized state space with precomputed stopping rates.
#[derive(Debug, Clone)]
pub struct StateSpace {
    pub(crate) unit: RateUnit,
    pub(crate) delta: f64,
    pub(crate) cap: usize,
    pub(crate) e_units: Vec<usize>,
    pub(crate) e: Axis,
    pub(crate) h: Axis,
    pub(crate) hc: Axis,
    pub(crate) p_s: f64,
    /// Probability weight of each `(hc, phi)` draw, indexed `hc * 2 + phi`.
    pub(crate) draw_weights: Vec<f64>,
    /// Stopping rate by `((b * n_h + h) * n_hc + hc) * 2 + phi`.
    rates: Vec<f64>,
}

impl StateSpace {
    pub fn new(model: &SystemModel, cfg: &SolverConfig) -> Result<Self> {
        let cap = model.b_max_units() as usize;
        let harvest = model.harvest();
        let e = Axis {
            values: harvest.chain().states().to_vec(),
            next: sparse_rows(harvest.chain().transition()),
            stationary: harvest.chain().stationary_distribution()?,
            locator: Locator::Nearest,
        };
        let h = Axis::from_gain(model.private(), cfg.common_bins)?;
        let hc = Axis::from_gain(model.common(), cfg.common_bins)?;
        let p_s = model.access().securing_probability();
        let entries = (cap + 1) * h.len() * hc.len() * 2;
        if entries > MAX_RATE_ENTRIES {
            return Err(Error::InvalidModel(format!(
                "DP state space too large ({entries} rate entries); lower the battery cap or bin count"
            )));
        }
        let unit = model.rate_unit();
        let delta = model.delta();
        let mut rates = Vec::with_capacity(entries);
        for b in 0..=cap {
            let energy = b as f64 * delta;
            for &hv in &h.values {
                for &hcv in &hc.values {
                    rates.push(stop_rate(energy, hv, hcv, false, unit));
                    rates.push(stop_rate(energy, hv, hcv, true, unit));
                }
            }
        }
        let mut draw_weights = Vec::with_capacity(hc.len() * 2);
        for &q in &hc.stationary {
            draw_weights.push(q * (1.0 - p_s));
            draw_weights.push(q * p_s);
        }
        Ok(Self {
            unit,
            delta,
            cap,
            e_units: harvest.units().iter().map(|&u| u as usize).collect(),
            e,
            h,
            hc,
            p_s,
            draw_weights,
            rates,
        })
    }

    /// Securing probability of the common channel.
    pub fn p_s(&self) -> f64 {
        self.p_s
    }

    pub fn battery_levels(&self) -> usize {
        self.cap + 1
    }

    pub fn reduced_len(&self) -> usize {
        (self.cap + 1) * self.e.len() * self.h.len()
    }

    pub fn len(&self) -> usize {
        self.reduced_len() * self.hc.len() * 2
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub(crate) fn n_e(&self) -> usize {
        self.e.len()
    }

    #[inline]
    pub(crate) fn n_h(&self) -> usize {
        self.h.len()
    }

    #[inline]
    pub(crate) fn n_draws(&self) -> usize {
        self.draw_weights.len()
    }

    #[inline]
    pub(crate) fn reduced(&self, b: usize, e: usize, h: usize) -> usize {
        (b * self.n_e() + e) * self.n_h() + h
    }

    #[inline]
    pub(crate) fn eh_index(&self, e: usize, h: usize) -> usize {
        e * self.n_h() + h
    }

    /// Rate of stopping with battery level `b` under draw `hc * 2 + phi`.
    #[inline]
    pub(crate) fn rate(&self, b: usize, h: usize, draw: usize) -> f64 {
        self.rates[(b * self.n_h() + h) * self.n_draws() + draw]
    }

    #[inline]
    pub(crate) fn battery_after(&self, b: usize, e_next: usize) -> usize {
        (b + self.e_units[e_next]).min(self.cap)
    }

    /// Battery level at the start of the next period when the harvest of
    /// the stopping slot is `e_next`.
    #[inline]
    pub(crate) fn battery_restart(&self, e_next: usize) -> usize {
        self.e_units[e_next].min(self.cap)
    }

    pub fn locate(&self, state: &SystemState) -> GridState {
        let b = (state.battery / self.delta).round().max(0.0) as usize;
        GridState {
            phi: state.phi,
            b: b.min(self.cap),
            e: nearest(&self.e.values, state.e_prev),
            h: self.h.locate(state.h),
            hc: self.hc.locate(state.h_common),
        }
    }

    /// Grid point as physical values.
    pub fn state_of(&self, g: GridState) -> SystemState {
        SystemState {
            phi: g.phi,
            battery: g.b as f64 * self.delta,
            e_prev: self.e.values[g.e],
            h: self.h.values[g.h],
            h_common: self.hc.values[g.hc],
        }
    }

    pub fn grid_rate(&self, g: GridState) -> f64 {
        self.rate(g.b, g.h, g.hc * 2 + usize::from(g.phi))
    }

    /// All grid states, battery-major.
    pub fn states(&self) -> impl Iterator<Item = GridState> + '_ {
        let (n_e, n_h, n_hc) = (self.n_e(), self.n_h(), self.hc.len());
        (0..=self.cap).flat_map(move |b| {
            (0..n_e).flat_map(move |e| {
                (0..n_h).flat_map(move |h| {
                    (0..n_hc).flat_map(move |hc| {
                        [false, true].into_iter().map(move |phi| GridState { phi, b, e, h, hc })
                    })
                })
            })
        })
    }

    pub fn rate_unit(&self) -> RateUnit {
        self.unit
    }

    /// Distribution of the reduced state at the start of a fresh run: the
    /// battery holds the harvest of one slot drawn from the stationary EH
    /// law, and the private gain is stationary.
    pub(crate) fn fresh_start(&self) -> Vec<f64> {
        let mut mu = vec![0.0; self.reduced_len()];
        for (e, &pe) in self.e.stationary.iter().enumerate() {
            for (h, &ph) in self.h.stationary.iter().enumerate() {
                mu[self.reduced(self.battery_restart(e), e, h)] += pe * ph;
            }
        }
        mu
    }
}
