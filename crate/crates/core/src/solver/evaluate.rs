//! Exact long-run evaluation of a stationary stop/continue rule on the
//! reduced chain `(b, e, h)`.

use crate::error::{Error, Result};

use super::config::SolverConfig;
use super::space::StateSpace;

#[derive(Debug, Clone)]
pub(crate) struct Evaluation {
    /// Long-run rate per slot, `E[R(F_T)] / E[T]`.
    pub gain: f64,
    /// Fraction of slots in which the transmitter stops, `1 / E[T]`.
    pub stop_rate: f64,
    pub occupancy: Vec<f64>,
    /// Relative value per reduced state, normalized to mean zero over the
    /// period-initial distribution.
    pub bias: Vec<f64>,
}

impl Evaluation {
    pub fn mean_saving_time(&self) -> f64 {
        1.0 / self.stop_rate
    }
}

/// Per reduced state: probability of stopping and expected reward earned.
fn stop_profile(space: &StateSpace, rule: &[bool]) -> (Vec<f64>, Vec<f64>) {
    let n = space.reduced_len();
    let nd = space.n_draws();
    let mut sigma = vec![0.0; n];
    let mut rho = vec![0.0; n];
    for b in 0..=space.cap {
        for e in 0..space.n_e() {
            for h in 0..space.n_h() {
                let r = space.reduced(b, e, h);
                for d in 0..nd {
                    if rule[r * nd + d] {
                        let w = space.draw_weights[d];
                        sigma[r] += w;
                        rho[r] += w * space.rate(b, h, d);
                    }
                }
            }
        }
    }
    (sigma, rho)
}

/// Calls `f(stop_target, continue_target, prob)` for every successor of `r`.
#[inline]
fn for_successors(space: &StateSpace, b: usize, e: usize, h: usize, mut f: impl FnMut(usize, usize, f64)) {
    for &(e2, pe) in &space.e.next[e] {
        let b_stop = space.battery_restart(e2);
        let b_cont = space.battery_after(b, e2);
        for &(h2, ph) in &space.h.next[h] {
            f(space.reduced(b_stop, e2, h2), space.reduced(b_cont, e2, h2), pe * ph);
        }
    }
}

pub(crate) fn evaluate(space: &StateSpace, rule: &[bool], cfg: &SolverConfig) -> Result<Evaluation> {
    let (sigma, rho) = stop_profile(space, rule);
    let n = space.reduced_len();

    // Cesàro limit from a fresh start by damped power iteration.
    let mut mu = space.fresh_start();
    let mut next = vec![0.0; n];
    let mut iterations = 0;
    loop {
        next.iter_mut().zip(&mu).for_each(|(x, m)| *x = 0.5 * m);
        for b in 0..=space.cap {
            for e in 0..space.n_e() {
                for h in 0..space.n_h() {
                    let r = space.reduced(b, e, h);
                    let m = 0.5 * mu[r];
                    if m == 0.0 {
                        continue;
                    }
                    let s = sigma[r];
                    for_successors(space, b, e, h, |rs, rc, p| {
                        next[rs] += m * s * p;
                        next[rc] += m * (1.0 - s) * p;
                    });
                }
            }
        }
        let change: f64 = next.iter().zip(&mu).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut mu, &mut next);
        iterations += 1;
        if change < 1e-15 {
            break;
        }
        if iterations >= cfg.value_iter_max_sweeps {
            return Err(Error::NoConvergence {
                what: "stationary distribution",
                iterations,
                residual: change,
            });
        }
    }
    let gain: f64 = mu.iter().zip(&rho).map(|(m, r)| m * r).sum();
    let stop_rate: f64 = mu.iter().zip(&sigma).map(|(m, s)| m * s).sum();

    // Distribution of the reduced state at the start of a period.
    let mut post = vec![0.0; n];
    if stop_rate > 0.0 {
        for b in 0..=space.cap {
            for e in 0..space.n_e() {
                for h in 0..space.n_h() {
                    let r = space.reduced(b, e, h);
                    let m = mu[r] * sigma[r] / stop_rate;
                    if m == 0.0 {
                        continue;
                    }
                    for_successors(space, b, e, h, |rs, _, p| post[rs] += m * p);
                }
            }
        }
    } else {
        post = space.fresh_start();
    }

    // Relative values: x = rho - gain + P x with sum(post * x) = 0.
    let mut x = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut iterations = 0;
    let tol = cfg.value_iter_tol;
    loop {
        for b in 0..=space.cap {
            for e in 0..space.n_e() {
                for h in 0..space.n_h() {
                    let r = space.reduced(b, e, h);
                    let s = sigma[r];
                    let mut px = 0.0;
                    for_successors(space, b, e, h, |rs, rc, p| {
                        px += p * (s * x[rs] + (1.0 - s) * x[rc]);
                    });
                    y[r] = 0.5 * x[r] + 0.5 * (rho[r] - gain + px);
                }
            }
        }
        let shift: f64 = y.iter().zip(&post).map(|(v, p)| v * p).sum();
        let mut change: f64 = 0.0;
        for (yv, xv) in y.iter_mut().zip(&x) {
            *yv -= shift;
            change = change.max((*yv - xv).abs());
        }
        std::mem::swap(&mut x, &mut y);
        iterations += 1;
        if change < tol {
            break;
        }
        if iterations >= cfg.value_iter_max_sweeps {
            return Err(Error::NoConvergence {
                what: "relative value evaluation",
                iterations,
                residual: change,
            });
        }
    }

    Ok(Evaluation {
        gain,
        stop_rate,
        occupancy: mu,
        bias: x,
    })
}

/// `K(e, h)`: expected relative value of the next period's start after
/// stopping with previous harvest `e` and private gain `h`.
pub(crate) fn restart_values(space: &StateSpace, bias: &[f64]) -> Vec<f64> {
    let mut k = vec![0.0; space.n_e() * space.n_h()];
    for e in 0..space.n_e() {
        for h in 0..space.n_h() {
            let mut acc = 0.0;
            for_successors(space, 0, e, h, |rs, _, p| acc += p * bias[rs]);
            k[space.eh_index(e, h)] = acc;
        }
    }
    k
}

/// One-step policy improvement against relative values `bias`; decisions
/// only change on a strict improvement.
pub(crate) fn improve(space: &StateSpace, rule: &[bool], bias: &[f64]) -> Vec<bool> {
    let k = restart_values(space, bias);
    let nd = space.n_draws();
    let scale = bias.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let eps = 1e-12 * scale;
    let mut out = rule.to_vec();
    for b in 0..=space.cap {
        for e in 0..space.n_e() {
            for h in 0..space.n_h() {
                let r = space.reduced(b, e, h);
                let mut cont = 0.0;
                for_successors(space, b, e, h, |_, rc, p| cont += p * bias[rc]);
                let restart = k[space.eh_index(e, h)];
                for d in 0..nd {
                    let stop = space.rate(b, h, d) + restart;
                    let i = r * nd + d;
                    if rule[i] && cont > stop + eps {
                        out[i] = false;
                    } else if !rule[i] && stop > cont + eps {
                        out[i] = true;
                    }
                }
            }
        }
    }
    out
}
