use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use super::markov::{sample_index, MarkovChain};
use crate::error::{Error, Result};

/// Distribution of a channel power gain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GainDistribution {
    Constant { value: f64 },
    Exponential { mean: f64 },
    Discrete { values: Vec<f64>, probabilities: Vec<f64> },
    Markov(MarkovChain),
}

impl GainDistribution {
    pub fn constant(value: f64) -> Result<Self> {
        let d = Self::Constant { value };
        d.validate()?;
        Ok(d)
    }

    pub fn exponential(mean: f64) -> Result<Self> {
        let d = Self::Exponential { mean };
        d.validate()?;
        Ok(d)
    }

    pub fn discrete(values: Vec<f64>, probabilities: Vec<f64>) -> Result<Self> {
        let d = Self::Discrete {
            values,
            probabilities,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Constant { value } => {
                if !value.is_finite() || *value < 0.0 {
                    return Err(Error::InvalidModel(format!(
                        "constant gain {value} must be finite and >= 0"
                    )));
                }
            }
            Self::Exponential { mean } => {
                if !mean.is_finite() || *mean <= 0.0 {
                    return Err(Error::InvalidModel(format!(
                        "exponential mean {mean} must be finite and > 0"
                    )));
                }
            }
            Self::Discrete {
                values,
                probabilities,
            } => {
                if values.is_empty() || values.len() != probabilities.len() {
                    return Err(Error::InvalidModel(
                        "discrete gain needs matching, nonempty values and probabilities".into(),
                    ));
                }
                if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
                    return Err(Error::InvalidModel("discrete gain values must be >= 0".into()));
                }
                if probabilities.iter().any(|p| !(0.0..=1.0).contains(p)) {
                    return Err(Error::InvalidModel(
                        "discrete gain probabilities must lie in [0, 1]".into(),
                    ));
                }
                let sum: f64 = probabilities.iter().sum();
                if (sum - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidModel(format!(
                        "discrete gain probabilities sum to {sum}, not 1"
                    )));
                }
            }
            // Construction already validated the chain.
            Self::Markov(_) => {}
        }
        Ok(())
    }

    /// Mean gain. Markov gains use the stationary distribution.
    pub fn mean(&self) -> Result<f64> {
        Ok(match self {
            Self::Constant { value } => *value,
            Self::Exponential { mean } => *mean,
            Self::Discrete {
                values,
                probabilities,
            } => values.iter().zip(probabilities).map(|(v, p)| v * p).sum(),
            Self::Markov(chain) => {
                let pi = chain.stationary_distribution()?;
                chain.states().iter().zip(&pi).map(|(v, p)| v * p).sum()
            }
        })
    }

    pub fn is_markov(&self) -> bool {
        matches!(self, Self::Markov(_))
    }

    /// Atoms and their probabilities for finitely supported kinds (Markov
    /// gains report their stationary marginal). `None` for continuous kinds.
    pub fn atoms(&self) -> Result<Option<(Vec<f64>, Vec<f64>)>> {
        Ok(match self {
            Self::Constant { value } => Some((vec![*value], vec![1.0])),
            Self::Discrete {
                values,
                probabilities,
            } => Some((values.clone(), probabilities.clone())),
            Self::Markov(chain) => Some((chain.states().to_vec(), chain.stationary_distribution()?)),
            Self::Exponential { .. } => None,
        })
    }
}

/// Draws one gain. Markov gains are drawn from their stationary marginal;
/// the simulator tracks chain state itself when correlation matters.
pub fn sample_gain<R: Rng + ?Sized>(dist: &GainDistribution, rng: &mut R) -> f64 {
    match dist {
        GainDistribution::Constant { value } => *value,
        GainDistribution::Exponential { mean } => {
            let x: f64 = Exp1.sample(rng);
            mean * x
        }
        GainDistribution::Discrete {
            values,
            probabilities,
        } => values[sample_index(probabilities, rng)],
        GainDistribution::Markov(chain) => {
            let pi = chain
                .stationary_distribution()
                .unwrap_or_else(|_| vec![1.0 / chain.len() as f64; chain.len()]);
            chain.value(sample_index(&pi, rng))
        }
    }
}

/// Equal-probability discretization of a continuous gain.
///
/// Bin `k` covers the quantiles `[k/n, (k+1)/n)` and is represented by the
/// conditional mean over the bin, so the first moment is preserved exactly.
pub fn discretize_gain(dist: &GainDistribution, n_bins: usize) -> Result<GainDistribution> {
    let binned = EqualProbabilityBins::new(dist, n_bins)?;
    let p = 1.0 / n_bins as f64;
    GainDistribution::discrete(binned.representatives, vec![p; n_bins])
}

/// Bin edges and representatives from an equal-probability discretization.
#[derive(Debug, Clone, PartialEq)]
pub struct EqualProbabilityBins {
    /// Upper edge of each bin; the last one is infinite.
    pub upper_edges: Vec<f64>,
    pub representatives: Vec<f64>,
}

impl EqualProbabilityBins {
    pub fn new(dist: &GainDistribution, n_bins: usize) -> Result<Self> {
        let mean = match dist {
            GainDistribution::Exponential { mean } => *mean,
            GainDistribution::Constant { .. } => return Err(Error::UnsupportedKind("constant gain")),
            GainDistribution::Discrete { .. } => return Err(Error::UnsupportedKind("discrete gain")),
            GainDistribution::Markov(_) => return Err(Error::UnsupportedKind("Markov gain")),
        };
        if n_bins < 2 {
            return Err(Error::InvalidModel(format!(
                "discretization needs at least 2 bins, got {n_bins}"
            )));
        }
        let n = n_bins as f64;
        // Survival at the lower and upper edge of bin k: 1 - k/n and 1 - (k+1)/n.
        let mut upper_edges = Vec::with_capacity(n_bins);
        let mut representatives = Vec::with_capacity(n_bins);
        for k in 0..n_bins {
            let s_lo = 1.0 - k as f64 / n;
            let s_hi = 1.0 - (k + 1) as f64 / n;
            let lo = -mean * s_lo.ln();
            if k + 1 == n_bins {
                upper_edges.push(f64::INFINITY);
                representatives.push(lo + mean);
            } else {
                let hi = -mean * s_hi.ln();
                upper_edges.push(hi);
                // E[X | lo < X < hi] for X ~ Exp(mean).
                let rep = mean + (lo * s_lo - hi * s_hi) / (s_lo - s_hi);
                representatives.push(rep);
            }
        }
        Ok(Self {
            upper_edges,
            representatives,
        })
    }

    /// Index of the bin containing `value`.
    pub fn locate(&self, value: f64) -> usize {
        self.upper_edges
            .partition_point(|&edge| edge <= value)
            .min(self.upper_edges.len() - 1)
    }
}

/// Random access to the common channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct AccessModel {
    p_s: f64,
}

impl AccessModel {
    pub fn new(p_s: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p_s) {
            return Err(Error::InvalidModel(format!(
                "securing probability {p_s} outside [0, 1]"
            )));
        }
        Ok(Self { p_s })
    }

    pub fn securing_probability(&self) -> f64 {
        self.p_s
    }

    /// Draws the access indicator for one slot.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> bool {
        let u: f64 = rng.gen();
        u < self.p_s
    }
}

impl TryFrom<f64> for AccessModel {
    type Error = Error;
    fn try_from(p: f64) -> Result<Self> {
        Self::new(p)
    }
}

impl From<AccessModel> for f64 {
    fn from(a: AccessModel) -> f64 {
        a.p_s
    }
}

pub fn sample_access<R: Rng + ?Sized>(model: &AccessModel, rng: &mut R) -> bool {
    model.sample(rng)
}
