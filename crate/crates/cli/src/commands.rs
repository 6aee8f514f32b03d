//! The subcommands besides `experiment`.

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use savetx::power::solve_water_level;
use savetx::sim::{
    run_best_effort, run_conventional, run_simulation, run_simulation_traced, Metrics, Policy, SimOptions,
};
use savetx::solver::{solve_markov, threshold_search};
use serde_json::json;

use crate::config::ExperimentConfig;
use crate::error::{CliError, Context, Result};
use crate::experiments::base_metadata;
use crate::output::{emit_csv, write_result, Cell, Format, Table};

/// `lambda*` of the state-dependent rule for every securing probability.
pub fn solve_markov_cmd(cfg: &ExperimentConfig, out_dir: &Path, format: Format) -> Result<Vec<PathBuf>> {
    let started = Instant::now();
    let mut table = Table::new(&["p_s", "lambda_star", "mean_T", "outer_iterations", "cap_occupancy"]);
    let mut details = Vec::new();
    for &p_s in &cfg.p_s_grid {
        let model = cfg.model(p_s)?;
        let vt = solve_markov(&model, &cfg.solver_config()).context(|| format!("solving the DP at p_s = {p_s}"))?;
        let r = vt.report().expect("solved table has a report");
        table.push(vec![
            p_s.into(),
            vt.lambda().into(),
            r.mean_saving_time.into(),
            (r.outer_iterations as u64).into(),
            r.cap_occupancy.into(),
        ]);
        details.push(json!({ "p_s": p_s, "report": r, "states": vt.space().len() }));
    }
    let meta = base_metadata(cfg, started, json!({ "per_p_s": details }));
    write_result(out_dir, "solve_markov", &table, &meta, format)
}

/// Best pure threshold for every securing probability.
pub fn optimize_threshold_cmd(cfg: &ExperimentConfig, out_dir: &Path, format: Format) -> Result<Vec<PathBuf>> {
    let started = Instant::now();
    let mut table = Table::new(&["p_s", "gamma", "throughput", "golden_gamma", "golden_throughput"]);
    let mut details = Vec::new();
    for &p_s in &cfg.p_s_grid {
        let model = cfg.model(p_s)?;
        let s = threshold_search(&model, &cfg.solver_config())
            .context(|| format!("optimizing the threshold at p_s = {p_s}"))?;
        table.push(vec![
            p_s.into(),
            s.best.gamma.into(),
            s.best.lambda_star.into(),
            s.golden.0.into(),
            s.golden.1.into(),
        ]);
        details.push(json!({ "p_s": p_s, "search": s }));
    }
    let meta = base_metadata(cfg, started, json!({ "per_p_s": details }));
    write_result(out_dir, "optimize_threshold", &table, &meta, format)
}

/// Policy selected on the command line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PolicyChoice {
    Dp,
    Threshold(f64),
    BestEffort,
    Conventional,
}

impl std::str::FromStr for PolicyChoice {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "dp" => Ok(PolicyChoice::Dp),
            "best-effort" | "best_effort" => Ok(PolicyChoice::BestEffort),
            "conventional" => Ok(PolicyChoice::Conventional),
            _ => match s.strip_prefix("threshold:").map(str::parse::<f64>) {
                Some(Ok(g)) if g >= 0.0 => Ok(PolicyChoice::Threshold(g)),
                _ => Err(format!(
                    "expected dp, threshold:<gamma>, best-effort or conventional, got `{s}`"
                )),
            },
        }
    }
}

impl PolicyChoice {
    fn label(&self) -> String {
        match self {
            PolicyChoice::Dp => "dp".into(),
            PolicyChoice::Threshold(g) => format!("threshold:{}", crate::output::format_number(*g)),
            PolicyChoice::BestEffort => "best_effort".into(),
            PolicyChoice::Conventional => "conventional".into(),
        }
    }
}

const TRACE_COLUMNS: [&str; 7] = ["period", "T", "battery_at_stop", "phi", "h", "h_common", "rate"];

/// Simulates one policy over the securing-probability grid, optionally
/// dumping a per-period trace for each grid point.
pub fn simulate_cmd(
    cfg: &ExperimentConfig,
    policy: PolicyChoice,
    trace: bool,
    out_dir: &Path,
    format: Format,
) -> Result<Vec<PathBuf>> {
    let started = Instant::now();
    let opts: SimOptions = cfg.sim_options();
    let mut table = Table::new(&[
        "p_s",
        "policy",
        "throughput",
        "se",
        "mean_T",
        "se_T",
        "periods",
        "cap_hit_fraction",
    ]);
    let mut written = Vec::new();
    let mut details = Vec::new();
    if trace && matches!(policy, PolicyChoice::BestEffort | PolicyChoice::Conventional) {
        return Err(CliError::config("trace", "traces record renewal periods; baselines have none"));
    }
    for &p_s in &cfg.p_s_grid {
        let model = cfg.model(p_s)?;
        let ctx = || format!("simulating {} at p_s = {p_s}", policy.label());
        let run = |p: &Policy| -> Result<(Metrics, Option<Table>)> {
            if trace {
                let (m, records) = run_simulation_traced(p, &model, cfg.mc.periods, cfg.seed, &opts).context(ctx)?;
                let mut t = Table::new(&TRACE_COLUMNS);
                for r in records {
                    t.push(vec![
                        r.period.into(),
                        r.saving_slots.into(),
                        r.battery_at_stop.into(),
                        Cell::Int(u64::from(r.phi)),
                        r.h.into(),
                        r.h_common.into(),
                        r.rate.into(),
                    ]);
                }
                Ok((m, Some(t)))
            } else {
                Ok((run_simulation(p, &model, cfg.mc.periods, cfg.seed, &opts).context(ctx)?, None))
            }
        };
        let (m, trace_table, extra) = match policy {
            PolicyChoice::Dp => {
                let vt = Arc::new(solve_markov(&model, &cfg.solver_config()).context(ctx)?);
                let lambda = vt.lambda();
                let (m, t) = run(&Policy::Dp(vt))?;
                (m, t, json!({ "lambda_star": lambda }))
            }
            PolicyChoice::Threshold(g) => {
                let (m, t) = run(&Policy::Threshold(g))?;
                (m, t, json!({ "gamma": g }))
            }
            PolicyChoice::BestEffort => (run_best_effort(&model, cfg.mc.slots, cfg.seed, &opts).context(ctx)?, None, json!({})),
            PolicyChoice::Conventional => {
                let level = solve_water_level(model.private(), model.common(), model.access(), cfg.p_bar).context(ctx)?;
                let m = run_conventional(&model, cfg.p_bar, cfg.mc.slots, cfg.seed, &opts).context(ctx)?;
                (m, None, json!({ "water_level": level.xi(), "p_bar": cfg.p_bar }))
            }
        };
        table.push(vec![
            p_s.into(),
            policy.label().into(),
            m.throughput.into(),
            m.se_throughput.into(),
            m.mean_saving_time.into(),
            m.se_saving_time.into(),
            m.periods.into(),
            m.cap_hit_fraction.into(),
        ]);
        if let Some(t) = trace_table {
            std::fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
            let path = out_dir.join(format!("trace_p_s_{}.csv", crate::output::format_number(p_s)));
            emit_csv(&t, &path)?;
            written.push(path);
        }
        details.push(json!({ "p_s": p_s, "metrics": m, "policy": extra }));
    }
    let meta = base_metadata(cfg, started, json!({ "policy": policy.label(), "per_p_s": details }));
    written.extend(write_result(out_dir, "simulate", &table, &meta, format)?);
    Ok(written)
}
