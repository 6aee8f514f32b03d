use savetx::models::{AccessModel, GainDistribution, HarvestModel, MarkovChain};
use savetx::presets::{iid_uplink, LARGE_B_MAX_UNITS};
use savetx::solver::{evaluate_threshold, optimize_threshold, threshold_search, SolverConfig};
use savetx::SystemModel;

fn cfg() -> SolverConfig {
    SolverConfig { mc_periods: 100_000, ..SolverConfig::default() }
}

#[test]
fn zero_threshold_has_unit_saving_time() {
    let model = iid_uplink(0.25, 1.0, LARGE_B_MAX_UNITS).unwrap();
    let m = evaluate_threshold(&model, 0.0, &cfg()).unwrap();
    assert_eq!(m.mean_saving_time, 1.0);
    assert!(evaluate_threshold(&model, -0.5, &cfg()).is_err());
}

#[test]
fn saving_time_falls_with_access() {
    let times: Vec<_> = [0.0, 0.25, 0.5, 0.75, 1.0]
        .iter()
        .map(|&p| evaluate_threshold(&iid_uplink(p, 1.0, LARGE_B_MAX_UNITS).unwrap(), 2.0, &cfg()).unwrap())
        .collect();
    for w in times.windows(2) {
        assert!(w[1].saving_time_ci95().1 < w[0].saving_time_ci95().0, "{:?}", w);
    }
}

#[test]
fn best_thresholds_near_reported_optima() {
    let g0 = optimize_threshold(&iid_uplink(0.0, 1.0, LARGE_B_MAX_UNITS).unwrap(), &cfg()).unwrap();
    assert!((1.25..=1.75).contains(&g0.gamma), "{g0:?}");
    let g5 = optimize_threshold(&iid_uplink(0.5, 1.0, LARGE_B_MAX_UNITS).unwrap(), &cfg()).unwrap();
    assert!((1.75..=2.25).contains(&g5.gamma), "{g5:?}");
}

#[test]
fn deterministic_world_scan_is_unimodal() {
    // Battery grows one step per slot, so the threshold only sets how long
    // to wait and log2(1 + b) / b peaks at the smallest wait.
    let model = SystemModel::new(
        GainDistribution::constant(1.0).unwrap(),
        GainDistribution::constant(1.0).unwrap(),
        AccessModel::new(0.0).unwrap(),
        HarvestModel::new(MarkovChain::constant(1.0).unwrap(), 1.0).unwrap(),
        1.0,
        LARGE_B_MAX_UNITS,
    )
    .unwrap();
    let search = threshold_search(&model, &SolverConfig { mc_periods: 2_000, ..SolverConfig::default() }).unwrap();
    let values: Vec<f64> = search.scan.iter().map(|p| p.1).collect();
    let top = values.iter().cloned().fold(f64::MIN, f64::max);
    let peak = values.iter().position(|&v| v == top).unwrap();
    assert!(values[..=peak].windows(2).all(|w| w[1] >= w[0] - 1e-12));
    assert!(values[peak..].windows(2).all(|w| w[1] <= w[0] + 1e-12));
    assert!((search.best.lambda_star - 1.0).abs() < 1e-12, "{:?}", search.best);
}
