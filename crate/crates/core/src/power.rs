//! Instantaneous rate and power allocation over the private and common
//! channels, for a per-slot energy budget and for a long-run average power
//! budget.
//!
//! Time is measured in slots, so a battery holding energy `B` transmits at
//! power `B` for one slot.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{AccessModel, GainDistribution};
use crate::special::exp_integral_e1;
use crate::state::SystemState;

/// Logarithm base of reported rates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RateUnit {
    /// log2: bits per slot.
    #[default]
    Bits,
    /// ln: nats per slot.
    Nats,
}

impl RateUnit {
    /// `log(1 + snr)` in this unit.
    #[inline]
    pub fn log1p(self, snr: f64) -> f64 {
        match self {
            RateUnit::Bits => snr.ln_1p() * std::f64::consts::LOG2_E,
            RateUnit::Nats => snr.ln_1p(),
        }
    }
}

/// Transmit powers over the private and the common channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerSplit {
    pub private: f64,
    pub common: f64,
}

impl PowerSplit {
    pub fn private_only(power: f64) -> Self {
        Self {
            private: power,
            common: 0.0,
        }
    }

    pub fn total(&self) -> f64 {
        self.private + self.common
    }
}

/// Water level `xi` of the average-power allocation; powers are
/// `(1/xi - 1/h)^+`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaterLevel(f64);

impl WaterLevel {
    pub fn new(xi: f64) -> Result<Self> {
        if xi.is_finite() && xi > 0.0 {
            Ok(Self(xi))
        } else {
            Err(Error::InvalidModel(format!("water level {xi} must be > 0")))
        }
    }

    pub fn xi(self) -> f64 {
        self.0
    }
}

/// Splits an energy budget across both channels to maximize the sum rate.
///
/// Both channels are filled to a common level `1/h + p` when the gap between
/// the inverse gains is smaller than the budget; otherwise everything goes to
/// the stronger channel. A zero-gain channel gets no power.
pub fn water_fill_two_channel(budget: f64, h_private: f64, h_common: f64) -> Result<PowerSplit> {
    if !(budget > 0.0) {
        return Err(Error::NonpositiveBudget(budget));
    }
    if h_common <= 0.0 {
        return Ok(PowerSplit::private_only(budget));
    }
    if h_private <= 0.0 {
        return Ok(PowerSplit {
            private: 0.0,
            common: budget,
        });
    }
    let gap = 1.0 / h_common - 1.0 / h_private;
    if gap.abs() < budget {
        let private = 0.5 * (budget + gap);
        Ok(PowerSplit {
            private,
            common: budget - private,
        })
    } else if h_private > h_common {
        Ok(PowerSplit::private_only(budget))
    } else {
        Ok(PowerSplit {
            private: 0.0,
            common: budget,
        })
    }
}

/// `log(1 + H P) + phi log(1 + H^c P^c)`.
pub fn instant_rate(state: &SystemState, split: PowerSplit, unit: RateUnit) -> Result<f64> {
    if !state.phi && split.common != 0.0 {
        return Err(Error::InconsistentSplit(split.common));
    }
    let mut rate = unit.log1p(state.h * split.private);
    if state.phi {
        rate += unit.log1p(state.h_common * split.common);
    }
    Ok(rate)
}

/// Rate obtained by spending the whole battery in this slot.
pub fn rate_at_stop(state: &SystemState, unit: RateUnit) -> f64 {
    stop_rate(state.battery, state.h, state.h_common, state.phi, unit)
}

/// [`rate_at_stop`] on loose arguments; the hot path of the solver and
/// simulator.
#[inline]
pub fn stop_rate(battery: f64, h: f64, h_common: f64, phi: bool, unit: RateUnit) -> f64 {
    if battery <= 0.0 {
        return 0.0;
    }
    if !phi {
        return unit.log1p(h * battery);
    }
    // Budget is positive here, so the split cannot fail.
    let split = water_fill_two_channel(battery, h, h_common).expect("positive budget");
    unit.log1p(h * split.private) + unit.log1p(h_common * split.common)
}

/// Power on one channel under the average-power water-filling rule.
pub fn conventional_power(h: f64, level: WaterLevel) -> f64 {
    if h <= 0.0 {
        return 0.0;
    }
    (1.0 / level.0 - 1.0 / h).max(0.0)
}

/// Expected water-filling power `E[(1/xi - 1/H)^+]` for a gain distribution.
pub fn expected_power(dist: &GainDistribution, xi: f64) -> Result<f64> {
    let level = WaterLevel::new(xi)?;
    Ok(match dist {
        GainDistribution::Exponential { mean } => {
            // ∫_xi^∞ (1/xi - 1/h) e^{-h/m}/m dh = e^{-xi/m}/xi - E1(xi/m)/m
            let z = xi / mean;
            (-z).exp() / xi - exp_integral_e1(z) / mean
        }
        other => {
            let (values, probs) = other.atoms()?.expect("finite support");
            values
                .iter()
                .zip(&probs)
                .map(|(&h, &p)| p * conventional_power(h, level))
                .sum()
        }
    })
}

fn expected_total_power(
    private: &GainDistribution,
    common: &GainDistribution,
    p_s: f64,
    xi: f64,
) -> Result<f64> {
    let mut total = expected_power(private, xi)?;
    if p_s > 0.0 {
        total += p_s * expected_power(common, xi)?;
    }
    Ok(total)
}

/// Water level meeting the average power budget
/// `E[P(H)] + p_s E[P^c(H^c)] = p_bar`.
///
/// Expectations are exact: closed form for exponential gains, finite sums
/// otherwise (Markov gains use their stationary marginal). The level is
/// found by bisection on `ln xi`.
pub fn solve_water_level(
    private: &GainDistribution,
    common: &GainDistribution,
    access: &AccessModel,
    p_bar: f64,
) -> Result<WaterLevel> {
    if !(p_bar > 0.0 && p_bar.is_finite()) {
        return Err(Error::NonpositiveBudget(p_bar));
    }
    let p_s = access.securing_probability();
    let f = |xi: f64| expected_total_power(private, common, p_s, xi);

    let mut lo = 1.0f64;
    let mut hi = 1.0f64;
    let mut steps = 0;
    while f(lo)? <= p_bar {
        lo *= 0.5;
        steps += 1;
        if steps > 2000 || lo < 1e-300 {
            return Err(Error::NoBracket { p_bar });
        }
    }
    steps = 0;
    while f(hi)? > p_bar {
        hi *= 2.0;
        steps += 1;
        if steps > 2000 || !hi.is_finite() {
            return Err(Error::NoBracket { p_bar });
        }
    }
    // f is nonincreasing in xi: f(lo) > p_bar >= f(hi).
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if f(mid)? > p_bar {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi / lo - 1.0 < 1e-15 {
            break;
        }
    }
    WaterLevel::new((lo * hi).sqrt())
}

/// Long-run average power and rate of the water-filling allocation,
/// computed exactly for finitely supported gains.
pub fn water_level_power(
    private: &GainDistribution,
    common: &GainDistribution,
    access: &AccessModel,
    level: WaterLevel,
) -> Result<f64> {
    expected_total_power(private, common, access.securing_probability(), level.xi())
}
