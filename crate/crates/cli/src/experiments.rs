//! The experiment tables.

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use savetx::models::EhPreset;
use savetx::sim::{run_best_effort, run_conventional, run_simulation, Metrics, Policy};
use savetx::solver::{evaluate_threshold, solve_markov, threshold_search, ValueTable};
use savetx::SystemModel;
use serde_json::{json, Value};

use crate::config::{EhSpec, ExperimentConfig, ExperimentName};
use crate::error::{Context, Result};
use crate::output::{write_result, Cell, Format, Table};

pub const FIG3_COLUMNS: [&str; 4] = ["p_s", "scheme", "throughput", "se"];
pub const FIG4_COLUMNS: [&str; 4] = ["p_s", "gamma", "throughput", "se"];
pub const FIG6_COLUMNS: [&str; 4] = ["p_s", "gamma_mode", "mean_T", "se"];
pub const FIG7_COLUMNS: [&str; 4] = ["eh_model", "gamma", "throughput", "se"];

/// One experiment's table and its metadata.
#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub stem: String,
    pub table: Table,
    pub meta: Value,
}

/// Everything the sidecar needs besides the experiment-specific details.
pub fn base_metadata(cfg: &ExperimentConfig, started: Instant, details: Value) -> Value {
    json!({
        "experiment": cfg.experiment.as_str(),
        "seed": cfg.seed,
        "config": serde_json::to_value(cfg).expect("config serializes"),
        "config_toml": cfg.to_toml(),
        "details": details,
        "provenance": {
            "tool": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "step_power": cfg.step_power(),
            "common_random_numbers": "every policy, threshold and securing probability reuses the same seed",
            "initial_battery": "a fresh run starts with one stationary harvest draw in the battery; warm-up periods are discarded",
            "b_max_units": if cfg.b_max_units == savetx::presets::LARGE_B_MAX_UNITS {
                "large-battery stand-in for an unbounded battery"
            } else {
                "finite battery"
            },
        },
        "wall_clock_s": started.elapsed().as_secs_f64(),
    })
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let started = Instant::now();
    let (table, details) = match cfg.experiment {
        ExperimentName::Fig3 => schemes(cfg, true)?,
        ExperimentName::Fig8 => schemes(cfg, false)?,
        ExperimentName::Custom => {
            let markov = !cfg.model(cfg.p_s_grid[0])?.is_iid();
            schemes(cfg, markov)?
        }
        ExperimentName::Fig4 => threshold_grid(cfg)?,
        ExperimentName::Fig6 => saving_times(cfg)?,
        ExperimentName::Fig7 => eh_diversity(cfg)?,
    };
    Ok(ExperimentResult {
        stem: cfg.experiment.as_str().to_string(),
        table,
        meta: base_metadata(cfg, started, details),
    })
}

pub fn run_and_write(cfg: &ExperimentConfig, out_dir: &Path, format: Format) -> Result<Vec<PathBuf>> {
    let result = run_experiment(cfg)?;
    write_result(out_dir, &result.stem, &result.table, &result.meta, format)
}

fn metrics_json(m: &Metrics) -> Value {
    serde_json::to_value(m).expect("metrics serialize")
}

/// DP solution and its simulated throughput.
pub fn solve_dp(cfg: &ExperimentConfig, model: &SystemModel, p_s: f64) -> Result<(Arc<ValueTable>, Metrics)> {
    let scfg = cfg.solver_config();
    let table = Arc::new(solve_markov(model, &scfg).context(|| format!("solving the DP at p_s = {p_s}"))?);
    let m = run_simulation(&Policy::Dp(Arc::clone(&table)), model, cfg.mc.periods, cfg.seed, &cfg.sim_options())
        .context(|| format!("simulating the DP policy at p_s = {p_s}"))?;
    Ok((table, m))
}

/// Opportunistic scheme against best-effort delivery and the conventional
/// supply, over the securing-probability grid.
fn schemes(cfg: &ExperimentConfig, markov: bool) -> Result<(Table, Value)> {
    let mut table = Table::new(&FIG3_COLUMNS);
    let mut details = Vec::new();
    let opts = cfg.sim_options();
    for &p_s in &cfg.p_s_grid {
        let model = cfg.model(p_s)?;
        let (opportunistic, solver) = if markov {
            let (vt, m) = solve_dp(cfg, &model, p_s)?;
            let report = vt.report().expect("solved table has a report");
            (
                m,
                json!({
                    "policy": "dp",
                    "lambda_star": vt.lambda(),
                    "report": report,
                    "states": vt.space().len(),
                }),
            )
        } else {
            let search = threshold_search(&model, &cfg.solver_config())
                .context(|| format!("optimizing the threshold at p_s = {p_s}"))?;
            let m = evaluate_threshold(&model, search.best.gamma, &cfg.solver_config())
                .context(|| format!("evaluating the threshold at p_s = {p_s}"))?;
            (m, json!({ "policy": "threshold", "search": search }))
        };
        let be = run_best_effort(&model, cfg.mc.slots, cfg.seed, &opts)
            .context(|| format!("best-effort delivery at p_s = {p_s}"))?;
        let conv = run_conventional(&model, cfg.p_bar, cfg.mc.slots, cfg.seed, &opts)
            .context(|| format!("conventional supply at p_s = {p_s}"))?;
        for (scheme, m) in [("opportunistic", &opportunistic), ("best_effort", &be), ("conventional", &conv)] {
            table.push(vec![p_s.into(), scheme.into(), m.throughput.into(), m.se_throughput.into()]);
        }
        details.push(json!({
            "p_s": p_s,
            "solver": solver,
            "opportunistic": metrics_json(&opportunistic),
            "best_effort": metrics_json(&be),
            "conventional": metrics_json(&conv),
            "cap_hit_fraction": opportunistic.cap_hit_fraction,
        }));
    }
    Ok((table, json!({ "p_bar": cfg.p_bar, "per_p_s": details })))
}

/// Throughput of every threshold on the grid.
fn threshold_grid(cfg: &ExperimentConfig) -> Result<(Table, Value)> {
    let mut table = Table::new(&FIG4_COLUMNS);
    let mut details = Vec::new();
    for &p_s in &cfg.p_s_grid {
        let model = cfg.model(p_s)?;
        let mut best = (f64::NAN, f64::MIN);
        let mut cap_hits = Vec::new();
        for &gamma in &cfg.gamma_grid {
            let m = evaluate_threshold(&model, gamma, &cfg.solver_config())
                .context(|| format!("threshold {gamma} at p_s = {p_s}"))?;
            if m.throughput > best.1 {
                best = (gamma, m.throughput);
            }
            cap_hits.push(m.cap_hit_fraction);
            table.push(vec![p_s.into(), gamma.into(), m.throughput.into(), m.se_throughput.into()]);
        }
        details.push(json!({ "p_s": p_s, "grid_argmax": best.0, "cap_hit_fraction": cap_hits }));
    }
    Ok((table, json!({ "per_p_s": details })))
}

/// Mean saving time at two fixed thresholds and at the optimized one.
fn saving_times(cfg: &ExperimentConfig) -> Result<(Table, Value)> {
    let mut table = Table::new(&FIG6_COLUMNS);
    let mut details = Vec::new();
    let scfg = cfg.solver_config();
    for &p_s in &cfg.p_s_grid {
        let model = cfg.model(p_s)?;
        for gamma in [1.5, 2.0] {
            let m = evaluate_threshold(&model, gamma, &scfg).context(|| format!("threshold {gamma} at p_s = {p_s}"))?;
            table.push(vec![p_s.into(), format_gamma(gamma).into(), m.mean_saving_time.into(), m.se_saving_time.into()]);
        }
        let search = threshold_search(&model, &scfg).context(|| format!("optimizing the threshold at p_s = {p_s}"))?;
        let m = evaluate_threshold(&model, search.best.gamma, &scfg)
            .context(|| format!("evaluating the threshold at p_s = {p_s}"))?;
        table.push(vec![p_s.into(), "optimal".into(), m.mean_saving_time.into(), m.se_saving_time.into()]);
        details.push(json!({ "p_s": p_s, "optimal_gamma": search.best.gamma, "optimal_throughput": m.throughput }));
    }
    Ok((table, json!({ "per_p_s": details })))
}

fn format_gamma(g: f64) -> String {
    crate::output::format_number(g)
}

/// Threshold sweeps under each harvest model.
fn eh_diversity(cfg: &ExperimentConfig) -> Result<(Table, Value)> {
    let mut table = Table::new(&FIG7_COLUMNS);
    let mut details = Vec::new();
    let p_s = cfg.p_s_grid[0];
    let scfg = cfg.solver_config();
    for &name in &cfg.eh_models {
        let model = cfg.model_with(p_s, &EhSpec::Preset { name })?;
        for &gamma in &cfg.gamma_grid {
            let m = evaluate_threshold(&model, gamma, &scfg)
                .context(|| format!("EH model {name}, threshold {gamma}"))?;
            table.push(vec![Cell::from(name.as_str()), gamma.into(), m.throughput.into(), m.se_throughput.into()]);
        }
        let search = threshold_search(&model, &scfg).context(|| format!("optimizing the threshold for EH model {name}"))?;
        let best = evaluate_threshold(&model, search.best.gamma, &scfg)
            .context(|| format!("evaluating the threshold for EH model {name}"))?;
        details.push(json!({
            "eh_model": name,
            "stationary_good": stationary_good(cfg, name)?,
            "optimal_gamma": search.best.gamma,
            "optimal": metrics_json(&best),
        }));
    }
    Ok((table, json!({ "p_s": p_s, "per_model": details })))
}

fn stationary_good(cfg: &ExperimentConfig, name: EhPreset) -> Result<f64> {
    let harvest = cfg.harvest(&EhSpec::Preset { name })?;
    let pi = harvest.chain().stationary_distribution().context(|| format!("EH model {name}"))?;
    Ok(pi[pi.len() - 1])
}
