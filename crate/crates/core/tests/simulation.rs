mod oracles;

use std::sync::Arc;

use savetx::models::{AccessModel, GainDistribution, HarvestModel, MarkovChain};
use savetx::power::{stop_rate, RateUnit};
use savetx::presets::{iid_uplink, markov_uplink, LARGE_B_MAX_UNITS, MARKOV_B_MAX_UNITS};
use savetx::sim::{
    run_best_effort, run_conventional, run_periods, run_simulation, run_simulation_traced, Policy, SimOptions,
};
use savetx::solver::{solve_markov, SolverConfig};
use savetx::{Error, SystemModel};

fn constant_world(delta: f64, b_max_units: u32) -> SystemModel {
    SystemModel::new(
        GainDistribution::constant(1.0).unwrap(),
        GainDistribution::constant(1.0).unwrap(),
        AccessModel::new(0.0).unwrap(),
        HarvestModel::new(MarkovChain::constant(delta).unwrap(), delta).unwrap(),
        delta,
        b_max_units,
    )
    .unwrap()
}

fn opts() -> SimOptions {
    SimOptions::default()
}

#[test]
fn zero_threshold_stops_every_slot() {
    let model = iid_uplink(0.5, 1.0, LARGE_B_MAX_UNITS).unwrap();
    let m = run_simulation(&Policy::Threshold(0.0), &model, 50_000, 1, &opts()).unwrap();
    assert_eq!(m.mean_saving_time, 1.0);
    assert_eq!(m.slots, m.periods);
    assert_eq!(m.se_saving_time, 0.0);
}

#[test]
fn constant_world_is_exact() {
    let d = 1e-3;
    let m = run_simulation(&Policy::Threshold(0.0), &constant_world(d, 1), 10_000, 5, &opts()).unwrap();
    let want = (1.0f64 + d).log2();
    assert!((m.throughput - want).abs() < 1e-12 * want);
    assert!(m.se_throughput < 1e-15);
    let be = run_best_effort(&constant_world(d, 1), 10_000, 5, &opts()).unwrap();
    assert!((be.throughput - want).abs() < 1e-12 * want);
}

#[test]
fn runs_are_bitwise_reproducible() {
    let model = iid_uplink(0.5, 1.0, LARGE_B_MAX_UNITS).unwrap();
    let a = run_simulation(&Policy::Threshold(2.0), &model, 40_000, 42, &opts()).unwrap();
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let b = single.install(|| run_simulation(&Policy::Threshold(2.0), &model, 40_000, 42, &opts()).unwrap());
    assert_eq!(a, b);
    assert_eq!(a.throughput.to_bits(), b.throughput.to_bits());
    let c = run_simulation(&Policy::Threshold(2.0), &model, 40_000, 43, &opts()).unwrap();
    assert_ne!(a, c);
}

#[test]
fn energy_is_conserved() {
    let cfg = SolverConfig::default();
    let markov = markov_uplink(0.5, 1.0, MARKOV_B_MAX_UNITS).unwrap();
    let table = Arc::new(solve_markov(&markov, &cfg).unwrap());
    let cases = [
        (Policy::Dp(table), markov),
        (Policy::Threshold(2.0), iid_uplink(0.25, 1.0, 12).unwrap()),
        (Policy::Threshold(3.0), iid_uplink(0.0, 1.0, LARGE_B_MAX_UNITS).unwrap()),
    ];
    for (policy, model) in &cases {
        let periods = run_periods(policy, model, 20_000, 9, 0, &opts()).unwrap();
        let cap = model.capacity();
        let (mut spent, mut harvested) = (0.0, periods[0].carried_in);
        for (i, p) in periods.iter().enumerate() {
            assert!(p.saving_slots >= 1);
            assert!(p.energy_spent >= 0.0 && p.energy_spent <= cap);
            assert_eq!(p.energy_spent, p.stop_state.battery);
            assert_eq!(p.energy_spent, p.carried_in + p.harvested - p.clipped);
            assert!(p.clipped >= 0.0);
            assert_eq!(p.rate_at_stop, model.rate(&p.stop_state));
            if let Some(next) = periods.get(i + 1) {
                assert_eq!(next.carried_in, p.harvest_at_stop.min(cap));
            }
            spent += p.energy_spent;
            harvested += p.harvested + p.harvest_at_stop;
            assert!(spent <= harvested);
        }
    }
}

#[test]
fn trace_reproduces_renewal_ratio() {
    let model = iid_uplink(0.5, 1.0, LARGE_B_MAX_UNITS).unwrap();
    let (m, trace) = run_simulation_traced(&Policy::Threshold(1.5), &model, 30_000, 4, &opts()).unwrap();
    assert_eq!(trace.len() as u64, m.periods);
    let reward: f64 = trace.iter().map(|r| r.rate).sum();
    let slots: u64 = trace.iter().map(|r| r.saving_slots).sum();
    assert_eq!(slots, m.slots);
    assert!((m.throughput - reward / slots as f64).abs() < 1e-12);
    assert!(trace.iter().enumerate().all(|(i, r)| r.period == i as u64));
    let untraced = run_simulation(&Policy::Threshold(1.5), &model, 30_000, 4, &opts()).unwrap();
    assert_eq!(m, untraced);
}

fn check_against_reference(p_s: f64, gamma: f64) {
    let model = iid_uplink(p_s, 1.0, LARGE_B_MAX_UNITS).unwrap();
    let m = run_simulation(&Policy::Threshold(gamma), &model, 200_000, 21, &opts()).unwrap();
    let (thr, mean_t, se) =
        oracles::reference_threshold_sim(p_s, &[(0, 0.5), (4, 0.5)], LARGE_B_MAX_UNITS as u64, gamma, 10_000, 20, 99);
    let tol = 3.0 * (m.se_throughput.powi(2) + se.powi(2)).sqrt();
    assert!((m.throughput - thr).abs() < tol, "p_s {p_s} gamma {gamma}: {} vs {thr} (tol {tol})", m.throughput);
    assert!((m.mean_saving_time - mean_t).abs() < 0.02 * mean_t);
}

#[test]
fn threshold_matches_reference_simulator() {
    check_against_reference(0.0, 1.5);
    check_against_reference(0.5, 2.0);
}

#[test]
fn dp_never_skips_with_full_access() {
    let cfg = SolverConfig::default();
    let model = markov_uplink(1.0, 1.0, MARKOV_B_MAX_UNITS).unwrap();
    let table = Arc::new(solve_markov(&model, &cfg).unwrap());
    let periods = run_periods(&Policy::Dp(Arc::clone(&table)), &model, 20_000, 8, 0, &opts()).unwrap();
    for p in &periods {
        assert_eq!(p.saving_slots, 1);
        // The same budget and rate best-effort would use in this slot.
        let s = p.stop_state;
        assert_eq!(s.battery, s.e_prev);
        assert_eq!(p.rate_at_stop, stop_rate(s.e_prev, s.h, s.h_common, s.phi, RateUnit::Bits));
    }
    let dp = run_simulation(&Policy::Dp(table), &model, 200_000, 8, &opts()).unwrap();
    let be = run_best_effort(&model, 1_000_000, 8, &opts()).unwrap();
    let se = (dp.se_throughput.powi(2) + be.se_throughput.powi(2)).sqrt();
    assert!((dp.throughput - be.throughput).abs() < 2.0 * se, "{dp:?} {be:?}");
}

#[test]
fn best_effort_skips_zero_harvest_slots() {
    // Half the slots have nothing to spend: throughput is E[log2(1 + 4H)] / 2.
    let model = iid_uplink(0.0, 1.0, LARGE_B_MAX_UNITS).unwrap();
    let m = run_best_effort(&model, 1_000_000, 6, &opts()).unwrap();
    let n = 400_000;
    let top = 40.0;
    let dh = top / n as f64;
    let full: f64 = (0..n)
        .map(|i| {
            let h = (i as f64 + 0.5) * dh;
            (1.0 + 4.0 * h).log2() * (-h).exp()
        })
        .sum::<f64>()
        * dh;
    assert!((m.throughput - 0.5 * full).abs() < 3.0 * m.se_throughput, "{} vs {}", m.throughput, 0.5 * full);
}

#[test]
fn conventional_supply() {
    let flat = SystemModel::new(
        GainDistribution::constant(1.0).unwrap(),
        GainDistribution::constant(1.0).unwrap(),
        AccessModel::new(0.0).unwrap(),
        HarvestModel::new(MarkovChain::constant(1.0).unwrap(), 1.0).unwrap(),
        1.0,
        1,
    )
    .unwrap();
    let m = run_conventional(&flat, 2.0, 10_000, 1, &opts()).unwrap();
    assert!((m.throughput - 3f64.log2()).abs() < 1e-12);
    assert!((m.average_power.unwrap() - 2.0).abs() < 1e-12);

    let model = iid_uplink(0.5, 1.0, LARGE_B_MAX_UNITS).unwrap();
    let m = run_conventional(&model, 2.0, 1_000_000, 2, &opts()).unwrap();
    assert!((m.average_power.unwrap() - 2.0).abs() < 0.02);
}

#[test]
fn unreachable_threshold_overflows() {
    let model = constant_world(1.0, 4);
    let o = SimOptions { period_slot_cap: 1_000, ..opts() };
    assert_eq!(
        run_simulation(&Policy::Threshold(10.0), &model, 10, 1, &o),
        Err(Error::PeriodOverflow { cap: 1_000 })
    );
}

#[test]
fn baselines_have_no_periods() {
    let model = constant_world(1.0, 4);
    assert!(run_simulation(&Policy::BestEffort, &model, 10, 1, &opts()).is_err());
}
