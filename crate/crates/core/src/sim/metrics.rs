use serde::{Deserialize, Serialize};

/// Renewal-reward statistics of a simulation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    /// Long-run rate per slot, total rate at stops over total slots.
    pub throughput: f64,
    /// Mean number of slots per save-then-transmit period.
    pub mean_saving_time: f64,
    pub se_throughput: f64,
    pub se_saving_time: f64,
    pub periods: u64,
    pub slots: u64,
    /// Fraction of periods in which the battery overflowed.
    pub cap_hit_fraction: f64,
    /// Realized average transmit power (conventional supply only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub average_power: Option<f64>,
}

/// Sums collected by one replication.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct BatchSums {
    pub reward: f64,
    pub slots: u64,
    pub periods: u64,
    pub cap_hits: u64,
    pub power: f64,
}

impl Metrics {
    pub(crate) fn from_batches(batches: &[BatchSums], with_power: bool) -> Self {
        let mut total = BatchSums::default();
        for b in batches {
            total.reward += b.reward;
            total.slots += b.slots;
            total.periods += b.periods;
            total.cap_hits += b.cap_hits;
            total.power += b.power;
        }
        let throughputs: Vec<f64> = batches
            .iter()
            .filter(|b| b.slots > 0)
            .map(|b| b.reward / b.slots as f64)
            .collect();
        let saving: Vec<f64> = batches
            .iter()
            .filter(|b| b.periods > 0)
            .map(|b| b.slots as f64 / b.periods as f64)
            .collect();
        Metrics {
            throughput: total.reward / total.slots as f64,
            mean_saving_time: total.slots as f64 / total.periods as f64,
            se_throughput: standard_error(&throughputs),
            se_saving_time: standard_error(&saving),
            periods: total.periods,
            slots: total.slots,
            cap_hit_fraction: total.cap_hits as f64 / total.periods as f64,
            average_power: with_power.then(|| total.power / total.slots as f64),
        }
    }

    /// Lower and upper end of the 95% normal confidence interval.
    pub fn throughput_ci95(&self) -> (f64, f64) {
        (
            self.throughput - 1.96 * self.se_throughput,
            self.throughput + 1.96 * self.se_throughput,
        )
    }

    pub fn saving_time_ci95(&self) -> (f64, f64) {
        (
            self.mean_saving_time - 1.96 * self.se_saving_time,
            self.mean_saving_time + 1.96 * self.se_saving_time,
        )
    }
}

/// Standard error of the mean of batch estimates.
pub(crate) fn standard_error(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (var / n as f64).sqrt()
}
