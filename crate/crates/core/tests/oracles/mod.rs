//! Reference implementations written independently of the library, shared
//! by the integration tests and the acceptance suite.

#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, Exp1};
use savetx::models::{AccessModel, GainDistribution, HarvestModel, MarkovChain};
use savetx::SystemModel;

/// `max_p log2(1 + h p) + log2(1 + hc (b - p))` by ternary search, or the
/// private-only rate without access.
pub fn best_rate(b: f64, h: f64, hc: f64, phi: bool) -> f64 {
    let f = |p: f64| (1.0 + h * p).log2() + (1.0 + hc * (b - p)).log2();
    if !phi {
        return (1.0 + h * b).log2();
    }
    let (mut lo, mut hi) = (0.0, b);
    for _ in 0..200 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if f(m1) < f(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    f(0.5 * (lo + hi)).max(f(0.0)).max(f(b))
}

/// Small Markov uplink: private chain, harvest chain, constant common gain.
#[derive(Debug, Clone)]
pub struct SmallWorld {
    pub h: Vec<f64>,
    pub ph: Vec<Vec<f64>>,
    pub e_units: Vec<usize>,
    pub pe: Vec<Vec<f64>>,
    pub hc: f64,
    pub p_s: f64,
    pub cap: usize,
}

fn random_row(rng: &mut StdRng, n: usize) -> Vec<f64> {
    let mut row: Vec<f64> = (0..n)
        .map(|_| if rng.gen_bool(0.25) { 0.0 } else { rng.gen_range(0.05..1.0) })
        .collect();
    if row.iter().all(|&x| x == 0.0) {
        row[rng.gen_range(0..n)] = 1.0;
    }
    let s: f64 = row.iter().sum();
    row.iter_mut().for_each(|x| *x /= s);
    row
}

impl SmallWorld {
    /// Free stop/continue choices: states with a nonempty battery, for each
    /// access outcome that can occur.
    pub fn decision_count(&self) -> usize {
        let phis = if self.p_s == 0.0 || self.p_s == 1.0 { 1 } else { 2 };
        self.cap * self.e_units.len() * self.h.len() * phis
    }

    /// Random world with at most `max_decisions` free choices.
    pub fn random(rng: &mut StdRng, max_decisions: usize) -> Self {
        loop {
            let n_h = rng.gen_range(1..=3);
            let n_e = rng.gen_range(1..=2);
            let mut e_units: Vec<usize> = (0..n_e).map(|_| rng.gen_range(0..=2)).collect();
            e_units.sort_unstable();
            e_units.dedup();
            let n_e = e_units.len();
            let p_s = match rng.gen_range(0..4) {
                0 => 0.0,
                1 => 1.0,
                _ => (rng.gen_range(0.05..0.95f64) * 100.0).round() / 100.0,
            };
            let w = SmallWorld {
                h: (0..n_h).map(|_| rng.gen_range(0.05..20.0)).collect(),
                ph: (0..n_h).map(|_| random_row(rng, n_h)).collect(),
                e_units,
                pe: (0..n_e).map(|_| random_row(rng, n_e)).collect(),
                hc: rng.gen_range(0.1..40.0),
                p_s,
                cap: rng.gen_range(1..=3),
            };
            let irreducible = |p: &[Vec<f64>]| {
                MarkovChain::new(vec![0.0; p.len()], p.to_vec())
                    .and_then(|c| c.stationary_distribution())
                    .is_ok()
            };
            if w.decision_count() <= max_decisions && irreducible(&w.ph) && irreducible(&w.pe) {
                return w;
            }
        }
    }

    pub fn model(&self) -> SystemModel {
        let private = GainDistribution::Markov(MarkovChain::new(self.h.clone(), self.ph.clone()).unwrap());
        let harvest = HarvestModel::from_units(
            self.e_units.iter().map(|&u| u as u32).collect(),
            self.pe.clone(),
            1.0,
        )
        .unwrap();
        SystemModel::new(
            private,
            GainDistribution::constant(self.hc).unwrap(),
            AccessModel::new(self.p_s).unwrap(),
            harvest,
            1.0,
            self.cap as u32,
        )
        .unwrap()
    }

    fn n(&self) -> usize {
        (self.cap + 1) * self.e_units.len() * self.h.len()
    }

    fn idx(&self, b: usize, e: usize, h: usize) -> usize {
        (b * self.e_units.len() + e) * self.h.len() + h
    }

    fn stationary(p: &[Vec<f64>]) -> Vec<f64> {
        stationary(p)
    }

    /// Long-run reward per slot of a stationary rule, from the same fresh
    /// start the library uses: stationary private gain, battery holding one
    /// stationary harvest draw. `stop[(state, phi)]` indexes `state * 2 + phi`.
    pub fn gain(&self, stop: &[bool]) -> f64 {
        let n = self.n();
        let n_e = self.e_units.len();
        let n_h = self.h.len();
        let mut p = vec![vec![0.0; n]; n];
        let mut r = vec![0.0; n];
        for b in 0..=self.cap {
            for e in 0..n_e {
                for h in 0..n_h {
                    let s = self.idx(b, e, h);
                    for (phi, w) in [(false, 1.0 - self.p_s), (true, self.p_s)] {
                        if w == 0.0 {
                            continue;
                        }
                        let st = stop[s * 2 + usize::from(phi)];
                        if st {
                            r[s] += w * best_rate(b as f64, self.h[h], self.hc, phi);
                        }
                        for e2 in 0..n_e {
                            for h2 in 0..n_h {
                                let q = w * self.pe[e][e2] * self.ph[h][h2];
                                if q == 0.0 {
                                    continue;
                                }
                                let b2 = if st { self.e_units[e2] } else { b + self.e_units[e2] }.min(self.cap);
                                p[s][self.idx(b2, e2, h2)] += q;
                            }
                        }
                    }
                }
            }
        }
        let pi_e = Self::stationary(&self.pe);
        let pi_h = Self::stationary(&self.ph);
        let mut mu = vec![0.0; n];
        for e in 0..n_e {
            for h in 0..n_h {
                mu[self.idx(self.e_units[e].min(self.cap), e, h)] += pi_e[e] * pi_h[h];
            }
        }
        let g = gain_vector(&p, &r);
        mu.iter().zip(&g).map(|(m, x)| m * x).sum()
    }

    /// Best gain over every stationary rule. Stopping with an empty battery
    /// earns nothing and moves the battery exactly as continuing does, so
    /// those choices are fixed to "continue".
    pub fn brute_force(&self) -> f64 {
        let n = self.n();
        let mut free = Vec::new();
        for b in 1..=self.cap {
            for e in 0..self.e_units.len() {
                for h in 0..self.h.len() {
                    for phi in [false, true] {
                        let w = if phi { self.p_s } else { 1.0 - self.p_s };
                        if w > 0.0 {
                            free.push(self.idx(b, e, h) * 2 + usize::from(phi));
                        }
                    }
                }
            }
        }
        assert!(free.len() <= 20, "too many decisions to enumerate");
        let mut best = f64::NEG_INFINITY;
        let mut stop = vec![false; 2 * n];
        for mask in 0u32..(1 << free.len()) {
            for (k, &i) in free.iter().enumerate() {
                stop[i] = mask >> k & 1 == 1;
            }
            best = best.max(self.gain(&stop));
        }
        best
    }
}

/// Unique stationary law from `(P^T - I + 11^T) pi = 1`, which is
/// nonsingular exactly when the law is unique.
fn stationary(p: &[Vec<f64>]) -> Vec<f64> {
    let n = p.len();
    let mut a = vec![vec![1.0; n + 1]; n];
    for t in 0..n {
        for s in 0..n {
            a[t][s] += p[s][t] - if s == t { 1.0 } else { 0.0 };
        }
    }
    solve(a)
}

/// Gaussian elimination with partial pivoting on an augmented matrix.
fn solve(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for c in 0..n {
        let piv = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        a.swap(c, piv);
        assert!(a[c][c].abs() > 1e-300, "singular system");
        for r in 0..n {
            if r != c {
                let f = a[r][c] / a[c][c];
                if f != 0.0 {
                    for k in c..=n {
                        a[r][k] -= f * a[c][k];
                    }
                }
            }
        }
    }
    (0..n).map(|i| a[i][n] / a[i][i]).collect()
}

/// Per-state long-run average reward of a finite chain, multichain allowed.
fn gain_vector(p: &[Vec<f64>], r: &[f64]) -> Vec<f64> {
    let n = p.len();
    let mut reach = vec![vec![false; n]; n];
    for i in 0..n {
        let mut stack = vec![i];
        reach[i][i] = true;
        while let Some(s) = stack.pop() {
            for t in 0..n {
                if p[s][t] > 0.0 && !reach[i][t] {
                    reach[i][t] = true;
                    stack.push(t);
                }
            }
        }
    }
    let recurrent: Vec<bool> = (0..n).map(|i| (0..n).all(|j| !reach[i][j] || reach[j][i])).collect();
    let mut g = vec![0.0; n];
    let mut done = vec![false; n];
    for i in 0..n {
        if !recurrent[i] || done[i] {
            continue;
        }
        let class: Vec<usize> = (0..n).filter(|&j| reach[i][j]).collect();
        let sub: Vec<Vec<f64>> = class.iter().map(|&s| class.iter().map(|&t| p[s][t]).collect()).collect();
        let pi = stationary(&sub);
        let avg: f64 = class.iter().zip(&pi).map(|(&s, x)| x * r[s]).sum();
        for &s in &class {
            g[s] = avg;
            done[s] = true;
        }
    }
    let transient: Vec<usize> = (0..n).filter(|&i| !recurrent[i]).collect();
    if !transient.is_empty() {
        let m = transient.len();
        let mut a = vec![vec![0.0; m + 1]; m];
        for (row, &s) in transient.iter().enumerate() {
            a[row][row] = 1.0;
            for (col, &t) in transient.iter().enumerate() {
                a[row][col] -= p[s][t];
            }
            a[row][m] = (0..n).filter(|&t| recurrent[t]).map(|t| p[s][t] * g[t]).sum();
        }
        let x = solve(a);
        for (k, &s) in transient.iter().enumerate() {
            g[s] = x[k];
        }
    }
    g
}

/// Separate simulator of the pure-threshold rule with unit-mean
/// exponential gains and i.i.d. harvest: returns (throughput, mean saving
/// time, throughput SE) from `batches` independent runs.
pub fn reference_threshold_sim(
    p_s: f64,
    harvest_units: &[(u64, f64)],
    cap: u64,
    gamma: f64,
    periods_per_batch: u64,
    batches: u64,
    seed: u64,
) -> (f64, f64, f64) {
    let mut per_batch = Vec::new();
    let (mut reward, mut slots, mut periods) = (0.0, 0u64, 0u64);
    for k in 0..batches {
        let mut rng = StdRng::seed_from_u64(seed.wrapping_mul(1_000_003).wrapping_add(k));
        let draw_e = |rng: &mut StdRng| {
            let u: f64 = rng.gen();
            let mut acc = 0.0;
            for &(units, p) in harvest_units {
                acc += p;
                if u < acc {
                    return units;
                }
            }
            harvest_units.last().unwrap().0
        };
        let mut battery = draw_e(&mut rng).min(cap);
        let (mut br, mut bs) = (0.0, 0u64);
        let warmup = 500;
        for period in 0..warmup + periods_per_batch {
            let mut t = 0u64;
            loop {
                t += 1;
                let phi = rng.gen::<f64>() < p_s;
                let h: f64 = Exp1.sample(&mut rng);
                let hc: f64 = Exp1.sample(&mut rng);
                let e = draw_e(&mut rng);
                let rate = best_rate(battery as f64, h, hc, phi);
                if rate >= gamma {
                    if period >= warmup {
                        br += rate;
                        bs += t;
                    }
                    battery = e.min(cap);
                    break;
                }
                battery = (battery + e).min(cap);
            }
        }
        per_batch.push(br / bs as f64);
        reward += br;
        slots += bs;
        periods += periods_per_batch;
    }
    let mean = per_batch.iter().sum::<f64>() / batches as f64;
    let var = per_batch.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (batches - 1) as f64;
    (reward / slots as f64, slots as f64 / periods as f64, (var / batches as f64).sqrt())
}
