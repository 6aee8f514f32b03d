use std::sync::Arc;

use crate::error::{Error, Result};
use crate::system::SystemModel;

use super::config::SolverConfig;
use super::evaluate::{evaluate, improve, restart_values, Evaluation};
use super::space::StateSpace;
use super::value::{value_iteration_in, SolveReport, ValueTable};

/// Optimal state-dependent stopping rule and throughput `lambda*`.
///
/// Starting from "always transmit", each outer step solves the stopping
/// problem at the current throughput `lambda_k` by value iteration and
/// updates `lambda_{k+1} = E[R(F_T)] / E[T]` from an exact stationary
/// evaluation of the induced rule. Because the next period starts from a
/// state that depends on where the last one stopped, the stopping reward
/// carries the relative value `K` of that restart; it is zero for i.i.d.
/// dynamics. If a step fails to raise the ratio, a one-step improvement
/// against the current relative values is tried instead, and the loop ends
/// when that leaves the rule unchanged.
pub fn solve_markov(model: &SystemModel, cfg: &SolverConfig) -> Result<ValueTable> {
    cfg.validate()?;
    let space = Arc::new(StateSpace::new(model, cfg)?);
    solve_in(space, cfg)
}

fn solve_in(space: Arc<StateSpace>, cfg: &SolverConfig) -> Result<ValueTable> {
    let mut rule = vec![true; space.len()];
    let mut ev = evaluate(&space, &rule, cfg)?;
    let mut history = vec![ev.gain];
    let mut sweeps = 0;
    let mut converged = false;

    for _ in 0..cfg.outer_max_iters {
        let eps = 1e-13 * ev.gain.abs().max(1.0);

        if ev.gain > 0.0 {
            let restart = restart_values(&space, &ev.bias);
            let table = value_iteration_in(Arc::clone(&space), ev.gain, restart, cfg)?;
            sweeps += table.sweeps;
            let candidate = table.stop_rule();
            if candidate != rule {
                if let Ok(next) = evaluate(&space, &candidate, cfg) {
                    if next.gain > ev.gain + eps {
                        let step = next.gain - ev.gain;
                        rule = candidate;
                        ev = next;
                        history.push(ev.gain);
                        if step >= cfg.lambda_tol {
                            continue;
                        }
                    }
                }
            }
        }

        let candidate = improve(&space, &rule, &ev.bias);
        if candidate == rule {
            converged = true;
            break;
        }
        let next = evaluate(&space, &candidate, cfg)?;
        if next.gain < ev.gain - cfg.lambda_tol {
            // Not an improvement; the current rule is already within tolerance.
            converged = true;
            break;
        }
        rule = candidate;
        ev = next;
        history.push(ev.gain);
    }
    if !converged {
        let n = history.len();
        let residual = if n > 1 { (history[n - 1] - history[n - 2]).abs() } else { f64::NAN };
        return Err(Error::NoConvergence {
            what: "throughput iteration",
            iterations: cfg.outer_max_iters,
            residual,
        });
    }
    finish(space, ev, history, sweeps, cfg)
}

fn finish(
    space: Arc<StateSpace>,
    ev: Evaluation,
    history: Vec<f64>,
    mut sweeps: usize,
    cfg: &SolverConfig,
) -> Result<ValueTable> {
    let restart = restart_values(&space, &ev.bias);
    let mut table = value_iteration_in(Arc::clone(&space), ev.gain, restart, cfg)?;
    sweeps += table.sweeps;
    let mut cap_occupancy = 0.0;
    for e in 0..space.n_e() {
        for h in 0..space.n_h() {
            cap_occupancy += ev.occupancy[space.reduced(space.cap, e, h)];
        }
    }
    table.report = Some(SolveReport {
        outer_iterations: history.len(),
        lambda_history: history,
        mean_saving_time: ev.mean_saving_time(),
        sweeps,
        cap_occupancy,
    });
    Ok(table)
}

/// Long-run throughput and mean saving time of the rule encoded in `table`,
/// evaluated exactly on its grid.
pub fn evaluate_table(table: &ValueTable, cfg: &SolverConfig) -> Result<(f64, f64)> {
    let space = table.space_arc();
    let ev = evaluate(&space, &table.stop_rule(), cfg)?;
    Ok((ev.gain, ev.mean_saving_time()))
}
