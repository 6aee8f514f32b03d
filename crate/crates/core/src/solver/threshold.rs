use serde::Serialize;

use crate::error::{Error, Result};
use crate::sim::{run_simulation, Metrics, Policy, SimOptions};
use crate::system::SystemModel;

use super::config::SolverConfig;
use super::search::{golden_section_max, grid_scan};

/// Pure rate-threshold rule: transmit at the first slot with rate >= gamma.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdPolicy {
    pub gamma: f64,
    /// Throughput achieved by `gamma` in the evaluation that selected it.
    pub lambda_star: f64,
}

impl ThresholdPolicy {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidModel(format!("threshold {gamma} must be >= 0")));
        }
        Ok(Self { gamma, lambda_star: f64::NAN })
    }
}

/// Everything the threshold search evaluated.
#[derive(Debug, Clone, Serialize)]
pub struct ThresholdSearch {
    /// Coarse grid over `[0, gamma_hi]`.
    pub scan: Vec<(f64, f64)>,
    /// Golden-section optimum.
    pub golden: (f64, f64),
    pub best: ThresholdPolicy,
    pub evaluations: usize,
}

/// Monte Carlo throughput and saving time of the threshold rule, over
/// `cfg.mc_periods` periods seeded by `cfg.seed`.
pub fn evaluate_threshold(model: &SystemModel, gamma: f64, cfg: &SolverConfig) -> Result<Metrics> {
    cfg.validate()?;
    let policy = ThresholdPolicy::new(gamma)?;
    run_simulation(
        &Policy::Threshold(policy.gamma),
        model,
        cfg.mc_periods,
        cfg.seed,
        &SimOptions::from(cfg),
    )
}

/// Best threshold on `[0, cfg.gamma_hi]`.
///
/// Throughput is conjectured quasi-concave in the threshold, so a
/// golden-section search is run and cross-checked with a coarse grid; the
/// better of the two wins. Every evaluation uses the same seed, so the
/// candidates are compared on common random numbers.
pub fn optimize_threshold(model: &SystemModel, cfg: &SolverConfig) -> Result<ThresholdPolicy> {
    threshold_search(model, cfg).map(|s| s.best)
}

/// [`optimize_threshold`] with the scan and golden-section results.
pub fn threshold_search(model: &SystemModel, cfg: &SolverConfig) -> Result<ThresholdSearch> {
    cfg.validate()?;
    let mut evaluations = 0;
    let mut eval = |gamma: f64| {
        evaluations += 1;
        evaluate_threshold(model, gamma, cfg).map(|m| m.throughput)
    };
    let scan = grid_scan(&mut eval, 0.0, cfg.gamma_hi, cfg.gamma_scan_points)?;
    let tol = 1e-3 * cfg.gamma_hi;
    let golden = golden_section_max(&mut eval, 0.0, cfg.gamma_hi, tol, 200)?;

    // Earliest grid maximizer on ties.
    let mut best = golden;
    for &(g, v) in &scan {
        if v > best.1 {
            best = (g, v);
        }
    }
    Ok(ThresholdSearch {
        scan,
        golden,
        best: ThresholdPolicy { gamma: best.0, lambda_star: best.1 },
        evaluations,
    })
}
