use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Numerical settings shared by the DP solver and the Monte Carlo evaluator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub value_iter_tol: f64,
    pub value_iter_max_sweeps: usize,
    pub lambda_tol: f64,
    pub outer_max_iters: usize,
    /// Bins used when a continuous gain enters the DP.
    pub common_bins: usize,
    /// Renewal periods per Monte Carlo evaluation, after warm-up.
    pub mc_periods: u64,
    pub warmup_periods: u64,
    /// Independent replications; also the batches of the standard error.
    pub batches: usize,
    /// A period longer than this many slots is an error.
    pub period_slot_cap: u64,
    /// Upper end of the threshold search interval.
    pub gamma_hi: f64,
    pub gamma_scan_points: usize,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            value_iter_tol: 1e-11,
            value_iter_max_sweeps: 2_000_000,
            lambda_tol: 1e-9,
            outer_max_iters: 200,
            common_bins: 64,
            mc_periods: 200_000,
            warmup_periods: 1_000,
            batches: 20,
            period_slot_cap: 1_000_000,
            gamma_hi: 5.0,
            gamma_scan_points: 21,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidModel(format!("solver config: {what}")));
        if !(self.value_iter_tol > 0.0) || !(self.lambda_tol > 0.0) {
            return bad("tolerances must be > 0");
        }
        if self.value_iter_max_sweeps == 0 || self.outer_max_iters == 0 {
            return bad("iteration limits must be >= 1");
        }
        if self.common_bins < 2 {
            return bad("common_bins must be >= 2");
        }
        if self.mc_periods == 0 || self.batches < 2 {
            return bad("mc_periods must be >= 1 and batches >= 2");
        }
        if self.period_slot_cap == 0 {
            return bad("period_slot_cap must be >= 1");
        }
        if !(self.gamma_hi > 0.0) || self.gamma_scan_points < 2 {
            return bad("gamma_hi must be > 0 and gamma_scan_points >= 2");
        }
        Ok(())
    }
}
