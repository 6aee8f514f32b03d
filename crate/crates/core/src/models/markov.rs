use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ROW_SUM_TOL: f64 = 1e-12;

/// A finite-state homogeneous Markov chain over nonnegative real values.
///
/// Used for the private-channel power gain and for the harvested energy per
/// slot. Rows of the transition matrix are indexed by the current state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawChain", into = "RawChain")]
pub struct MarkovChain {
    states: Vec<f64>,
    transition: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct RawChain {
    states: Vec<f64>,
    transition: Vec<Vec<f64>>,
}

impl TryFrom<RawChain> for MarkovChain {
    type Error = Error;
    fn try_from(raw: RawChain) -> Result<Self> {
        MarkovChain::new(raw.states, raw.transition)
    }
}

impl From<MarkovChain> for RawChain {
    fn from(c: MarkovChain) -> Self {
        RawChain {
            states: c.states,
            transition: c.transition,
        }
    }
}

impl MarkovChain {
    pub fn new(states: Vec<f64>, transition: Vec<Vec<f64>>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::InvalidModel("Markov chain needs at least one state".into()));
        }
        if let Some(v) = states.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidModel(format!(
                "Markov state value {v} is not a finite nonnegative number"
            )));
        }
        if transition.len() != states.len() {
            return Err(Error::InvalidModel(format!(
                "transition matrix has {} rows for {} states",
                transition.len(),
                states.len()
            )));
        }
        for (i, row) in transition.iter().enumerate() {
            if row.len() != states.len() {
                return Err(Error::InvalidModel(format!(
                    "transition row {i} has {} entries, expected {}",
                    row.len(),
                    states.len()
                )));
            }
            if row.iter().any(|p| !(0.0..=1.0).contains(p)) {
                return Err(Error::InvalidModel(format!(
                    "transition row {i} has an entry outside [0, 1]"
                )));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::InvalidModel(format!(
                    "transition row {i} sums to {sum}, not 1"
                )));
            }
        }
        Ok(Self { states, transition })
    }

    /// A chain that never leaves its only state.
    pub fn constant(value: f64) -> Result<Self> {
        Self::new(vec![value], vec![vec![1.0]])
    }

    /// A chain whose rows all equal `probabilities`, i.e. an i.i.d. sequence.
    pub fn iid(states: Vec<f64>, probabilities: Vec<f64>) -> Result<Self> {
        let rows = vec![probabilities; states.len()];
        Self::new(states, rows)
    }

    /// Two-state chain with the given switching probabilities out of each state.
    pub fn two_state(states: [f64; 2], leave_first: f64, leave_second: f64) -> Result<Self> {
        Self::new(
            states.to_vec(),
            vec![
                vec![1.0 - leave_first, leave_first],
                vec![leave_second, 1.0 - leave_second],
            ],
        )
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[f64] {
        &self.states
    }

    pub fn value(&self, index: usize) -> f64 {
        self.states[index]
    }

    pub fn transition(&self) -> &[Vec<f64>] {
        &self.transition
    }

    pub fn row(&self, index: usize) -> &[f64] {
        &self.transition[index]
    }

    /// True when every row is identical, so successive states are independent.
    pub fn is_iid(&self) -> bool {
        let first = &self.transition[0];
        self.transition
            .iter()
            .all(|row| row.iter().zip(first).all(|(a, b)| (a - b).abs() <= ROW_SUM_TOL))
    }

    /// Draws the next state index from row `current`.
    pub fn sample_next<R: Rng + ?Sized>(&self, current: usize, rng: &mut R) -> usize {
        sample_index(&self.transition[current], rng)
    }

    /// Stationary distribution of the chain.
    ///
    /// The chain must have a single closed communicating class; transient
    /// states get probability zero. The class is solved with the
    /// Grassmann-Taksar-Heyman elimination, which uses no subtractions and
    /// stays accurate for nearly decomposable chains.
    pub fn stationary_distribution(&self) -> Result<Vec<f64>> {
        let n = self.len();
        let classes = closed_classes(&self.transition);
        if classes.len() != 1 {
            return Err(Error::ReducibleChain {
                closed_classes: classes.len(),
            });
        }
        let class = &classes[0];
        let sub: Vec<Vec<f64>> = class
            .iter()
            .map(|&i| class.iter().map(|&j| self.transition[i][j]).collect())
            .collect();
        let pi_class = gth(sub);
        let mut pi = vec![0.0; n];
        for (k, &i) in class.iter().enumerate() {
            pi[i] = pi_class[k];
        }
        Ok(pi)
    }
}

/// Inverse-CDF draw of an index from a probability vector using one uniform.
pub(crate) fn sample_index<R: Rng + ?Sized>(probabilities: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in probabilities.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        acc += p;
        last = i;
        if u < acc {
            return i;
        }
    }
    last
}

fn gth(mut p: Vec<Vec<f64>>) -> Vec<f64> {
    let n = p.len();
    for k in (1..n).rev() {
        let s: f64 = p[k][..k].iter().sum();
        if s <= 0.0 {
            // Unreachable for an irreducible block; leave the row untouched.
            continue;
        }
        for i in 0..k {
            p[i][k] /= s;
        }
        for i in 0..k {
            let pik = p[i][k];
            if pik == 0.0 {
                continue;
            }
            for j in 0..k {
                let pkj = p[k][j];
                p[i][j] += pik * pkj;
            }
        }
    }
    let mut pi = vec![0.0; n];
    pi[0] = 1.0;
    for j in 1..n {
        pi[j] = (0..j).map(|i| pi[i] * p[i][j]).sum();
    }
    let total: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|x| *x /= total);
    pi
}

/// Closed communicating classes of a stochastic matrix, each sorted.
pub(crate) fn closed_classes(transition: &[Vec<f64>]) -> Vec<Vec<usize>> {
    let n = transition.len();
    let mut reach = vec![vec![false; n]; n];
    for i in 0..n {
        let mut stack = vec![i];
        reach[i][i] = true;
        while let Some(u) = stack.pop() {
            for (v, &p) in transition[u].iter().enumerate() {
                if p > 0.0 && !reach[i][v] {
                    reach[i][v] = true;
                    stack.push(v);
                }
            }
        }
    }
    let mut seen = vec![false; n];
    let mut classes = Vec::new();
    for i in 0..n {
        if seen[i] {
            continue;
        }
        let class: Vec<usize> = (0..n).filter(|&j| reach[i][j] && reach[j][i]).collect();
        class.iter().for_each(|&j| seen[j] = true);
        let closed = class
            .iter()
            .all(|&u| (0..n).all(|v| !reach[u][v] || class.contains(&v)));
        if closed {
            classes.push(class);
        }
    }
    classes
}
