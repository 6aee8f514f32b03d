use std::sync::Arc;

use crate::error::{Error, Result};
use crate::state::SystemState;
use crate::system::SystemModel;

use super::config::SolverConfig;
use super::space::{GridState, StateSpace};

/// Stop/continue decision of a stopping rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Stop,
    Continue,
}

/// Solution of the stopping problem at a fixed cost per slot.
///
/// For every grid state `F` the table holds
///
/// ```text
/// V(F) = max{ R(F) + K(F), E[V(F') | F, continue] } - lambda
/// ```
///
/// where `K(F)` is the expected relative value of the state that starts
/// the next period if the transmitter stops in `F`. When the private gain
/// and the harvest are i.i.d. the next period's start is independent of
/// `F` and `K` is identically zero, which is the classical rate-of-return
/// recursion `V(F) = max{R(F), E[V(F')|F]} - lambda`.
#[derive(Debug, Clone)]
pub struct ValueTable {
    space: Arc<StateSpace>,
    lambda: f64,
    /// `E[V(F') | F, continue]` per reduced state.
    continuation: Vec<f64>,
    /// `K` per `(e, h)`.
    restart: Vec<f64>,
    /// `V` averaged over `(hc, phi)` per reduced state.
    mean_value: Vec<f64>,
    pub(crate) sweeps: usize,
    pub(crate) residual: f64,
    pub(crate) report: Option<SolveReport>,
}

/// Diagnostics of [`super::solve_markov`].
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SolveReport {
    pub outer_iterations: usize,
    pub lambda_history: Vec<f64>,
    pub mean_saving_time: f64,
    pub sweeps: usize,
    /// Long-run fraction of slots that start with a full battery.
    pub cap_occupancy: f64,
}

impl ValueTable {
    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub(crate) fn space_arc(&self) -> Arc<StateSpace> {
        Arc::clone(&self.space)
    }

    /// Cost per slot the table was solved at; `lambda*` for tables returned
    /// by `solve_markov`.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn report(&self) -> Option<&SolveReport> {
        self.report.as_ref()
    }

    pub fn sweeps(&self) -> usize {
        self.sweeps
    }

    /// Sup-norm change of the last value-iteration sweep.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    fn reduced(&self, g: GridState) -> usize {
        self.space.reduced(g.b, g.e, g.h)
    }

    pub fn rate(&self, g: GridState) -> f64 {
        self.space.grid_rate(g)
    }

    pub fn continuation(&self, g: GridState) -> f64 {
        self.continuation[self.reduced(g)]
    }

    pub fn restart(&self, g: GridState) -> f64 {
        self.restart[self.space.eh_index(g.e, g.h)]
    }

    /// Reward of stopping now, including the value carried into the next
    /// period.
    pub fn stop_value(&self, g: GridState) -> f64 {
        self.rate(g) + self.restart(g)
    }

    pub fn value(&self, g: GridState) -> f64 {
        self.stop_value(g).max(self.continuation(g)) - self.lambda
    }

    /// `V(F) - (R(F) + K(F)) + lambda`; zero exactly where stopping is optimal.
    pub fn lambda_residual(&self, g: GridState) -> f64 {
        self.value(g) - self.stop_value(g) + self.lambda
    }

    /// Stop iff the stopping reward is at least the continuation value.
    pub fn decide(&self, g: GridState) -> Decision {
        if self.stop_value(g) >= self.continuation(g) {
            Decision::Stop
        } else {
            Decision::Continue
        }
    }

    /// Average of `V` over the common gain and access draw.
    pub fn mean_value(&self, b: usize, e: usize, h: usize) -> f64 {
        self.mean_value[self.space.reduced(b, e, h)]
    }

    /// Stop decision for every full state, indexed `reduced * n_draws + draw`.
    pub(crate) fn stop_rule(&self) -> Vec<bool> {
        let s = &*self.space;
        let mut rule = Vec::with_capacity(s.reduced_len() * s.n_draws());
        for b in 0..=s.cap {
            for e in 0..s.n_e() {
                for h in 0..s.n_h() {
                    let r = s.reduced(b, e, h);
                    let k = self.restart[s.eh_index(e, h)];
                    for d in 0..s.n_draws() {
                        rule.push(s.rate(b, h, d) + k >= self.continuation[r]);
                    }
                }
            }
        }
        rule
    }
}

/// Decision of a DP table for an arbitrary state; continuous gains are
/// mapped onto the table's grid.
pub fn dp_decide(table: &ValueTable, state: &SystemState) -> Decision {
    table.decide(table.space().locate(state))
}

/// Value iteration for the stopping problem with cost `lambda` per slot and
/// no carry-over between periods.
pub fn value_iteration(model: &SystemModel, lambda: f64, cfg: &SolverConfig) -> Result<ValueTable> {
    cfg.validate()?;
    let space = Arc::new(StateSpace::new(model, cfg)?);
    let restart = vec![0.0; space.n_e() * space.n_h()];
    value_iteration_in(space, lambda, restart, cfg)
}

pub(crate) fn value_iteration_in(
    space: Arc<StateSpace>,
    lambda: f64,
    restart: Vec<f64>,
    cfg: &SolverConfig,
) -> Result<ValueTable> {
    let s = &*space;
    let n_draws = s.n_draws();
    let w = &s.draw_weights;

    // Start from "stop now", a lower bound on the fixed point.
    let mut mean_value = vec![0.0; s.reduced_len()];
    for b in 0..=s.cap {
        for e in 0..s.n_e() {
            for h in 0..s.n_h() {
                let k = restart[s.eh_index(e, h)];
                let v: f64 = (0..n_draws).map(|d| w[d] * (s.rate(b, h, d) + k)).sum();
                mean_value[s.reduced(b, e, h)] = v - lambda;
            }
        }
    }
    let mut continuation = vec![f64::NEG_INFINITY; s.reduced_len()];

    // Continuing never lowers the battery, so sweeping from the top level
    // down reuses values already updated in this sweep.
    let mut sweeps = 0;
    let mut residual = f64::INFINITY;
    while sweeps < cfg.value_iter_max_sweeps {
        sweeps += 1;
        residual = 0.0;
        for b in (0..=s.cap).rev() {
            for e in 0..s.n_e() {
                for h in 0..s.n_h() {
                    let mut c = 0.0;
                    for &(e2, pe) in &s.e.next[e] {
                        let b2 = s.battery_after(b, e2);
                        for &(h2, ph) in &s.h.next[h] {
                            c += pe * ph * mean_value[s.reduced(b2, e2, h2)];
                        }
                    }
                    let r = s.reduced(b, e, h);
                    let change = (c - continuation[r]).abs();
                    if change > residual || change.is_nan() {
                        residual = change;
                    }
                    continuation[r] = c;
                    let k = restart[s.eh_index(e, h)];
                    let v: f64 = (0..n_draws).map(|d| w[d] * (s.rate(b, h, d) + k).max(c)).sum();
                    mean_value[r] = v - lambda;
                }
            }
        }
        if residual < cfg.value_iter_tol {
            break;
        }
    }
    if !(residual < cfg.value_iter_tol) {
        return Err(Error::NoConvergence {
            what: "value iteration",
            iterations: sweeps,
            residual,
        });
    }
    Ok(ValueTable {
        space,
        lambda,
        continuation,
        restart,
        mean_value,
        sweeps,
        residual,
        report: None,
    })
}
