//! Experiment configuration: a flat TOML key tree, fully defaulted per
//! experiment and validated with key paths in every error.

use std::fmt;
use std::str::FromStr;

use savetx::models::{
    eh_preset, AccessModel, EhPreset, EhPresetParams, GainDistribution, HarvestModel, MarkovChain,
};
use savetx::power::RateUnit;
use savetx::presets::{self, LARGE_B_MAX_UNITS, MARKOV_B_MAX_UNITS};
use savetx::solver::SolverConfig;
use savetx::SystemModel;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Context, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentName {
    Fig3,
    Fig4,
    Fig6,
    Fig7,
    Fig8,
    Custom,
}

impl ExperimentName {
    pub const ALL: [ExperimentName; 6] = [
        ExperimentName::Fig3,
        ExperimentName::Fig4,
        ExperimentName::Fig6,
        ExperimentName::Fig7,
        ExperimentName::Fig8,
        ExperimentName::Custom,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentName::Fig3 => "fig3",
            ExperimentName::Fig4 => "fig4",
            ExperimentName::Fig6 => "fig6",
            ExperimentName::Fig7 => "fig7",
            ExperimentName::Fig8 => "fig8",
            ExperimentName::Custom => "custom",
        }
    }

    /// Markov private channel with a state-dependent rule, as opposed to
    /// i.i.d. channels with a rate threshold.
    pub fn is_markov(self) -> bool {
        self == ExperimentName::Fig3
    }
}

impl fmt::Display for ExperimentName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentName {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|e| e.as_str() == s)
            .ok_or_else(|| CliError::config("experiment", format!("unknown experiment `{s}`")))
    }
}

/// Base of the logarithm in rates: `2` (bits) or `e` (nats).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogBase {
    Two,
    E,
}

impl LogBase {
    pub fn rate_unit(self) -> RateUnit {
        match self {
            LogBase::Two => RateUnit::Bits,
            LogBase::E => RateUnit::Nats,
        }
    }
}

impl Serialize for LogBase {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(match self {
            LogBase::Two => "2",
            LogBase::E => "e",
        })
    }
}

impl<'de> Deserialize<'de> for LogBase {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Float(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(2) => Ok(LogBase::Two),
            Raw::Float(x) if x == 2.0 => Ok(LogBase::Two),
            Raw::Float(x) if x == std::f64::consts::E => Ok(LogBase::E),
            Raw::Str(s) if s == "2" => Ok(LogBase::Two),
            Raw::Str(s) if s == "e" => Ok(LogBase::E),
            _ => Err(serde::de::Error::custom("log_base must be 2 or \"e\"")),
        }
    }
}

/// Battery capacity in energy steps, or `"large"` for the stand-in of an
/// unbounded battery.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BMax(pub u32);

impl<'de> Deserialize<'de> for BMax {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Count(i64),
            Word(String),
        }
        match Raw::deserialize(d)? {
            Raw::Count(n) if (1..=u32::MAX as i64).contains(&n) => Ok(BMax(n as u32)),
            Raw::Count(n) => Err(serde::de::Error::custom(format!("b_max_units must be >= 1, got {n}"))),
            Raw::Word(w) if w == "large" => Ok(BMax(LARGE_B_MAX_UNITS)),
            Raw::Word(w) => Err(serde::de::Error::custom(format!(
                "b_max_units must be a count or \"large\", got \"{w}\""
            ))),
        }
    }
}

/// Harvest process, in energy steps per slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EhSpec {
    /// One of the named two-state models; see `eh_presets`.
    Preset { name: EhPreset },
    Constant { units: u32 },
    Chain { units: Vec<u32>, transition: Vec<Vec<f64>> },
}

/// Monte Carlo budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McConfig {
    /// Renewal periods per policy evaluation.
    pub periods: u64,
    /// Slots per baseline run.
    pub slots: u64,
    /// Periods discarded before measuring; baselines discard ten times as
    /// many slots.
    pub warmup: u64,
    pub batches: usize,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            periods: 200_000,
            slots: 1_000_000,
            warmup: 1_000,
            batches: 20,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    experiment: Option<ExperimentName>,
    seed: Option<i64>,
    delta: Option<f64>,
    slot_ms: Option<f64>,
    b_max_units: Option<BMax>,
    p_s_grid: Option<Vec<f64>>,
    gamma_grid: Option<Vec<f64>>,
    p_bar: Option<f64>,
    log_base: Option<LogBase>,
    private: Option<GainDistribution>,
    common: Option<GainDistribution>,
    eh: Option<EhSpec>,
    eh_presets: Option<EhPresetParams>,
    eh_models: Option<Vec<EhPreset>>,
    solver: Option<SolverConfig>,
    mc: Option<McConfig>,
}

/// Fully resolved configuration. Serializing it gives a config file that
/// reproduces the run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentName,
    pub seed: u64,
    /// Energy step in joules.
    pub delta: f64,
    /// Slot length in milliseconds.
    pub slot_ms: f64,
    pub b_max_units: u32,
    pub p_s_grid: Vec<f64>,
    pub gamma_grid: Vec<f64>,
    /// Average power of the conventional supply, in steps per slot.
    pub p_bar: f64,
    pub log_base: LogBase,
    pub private: GainDistribution,
    pub common: GainDistribution,
    pub eh: EhSpec,
    pub eh_presets: EhPresetParams,
    pub eh_models: Vec<EhPreset>,
    pub solver: SolverConfig,
    pub mc: McConfig,
}

fn default_gamma_grid() -> Vec<f64> {
    (0..=20).map(|i| i as f64 * 0.25).collect()
}

impl ExperimentConfig {
    /// Defaults of one experiment.
    pub fn defaults(experiment: ExperimentName) -> Self {
        let exp = GainDistribution::exponential(1.0).expect("valid");
        let base = Self {
            experiment,
            seed: 0,
            delta: 1e-3,
            slot_ms: 1.0,
            b_max_units: LARGE_B_MAX_UNITS,
            p_s_grid: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            gamma_grid: default_gamma_grid(),
            // Mean harvested power of the 0-or-4-step harvest.
            p_bar: 2.0,
            log_base: LogBase::Two,
            private: exp.clone(),
            common: exp,
            eh: EhSpec::Preset { name: EhPreset::A },
            eh_presets: EhPresetParams::default(),
            eh_models: EhPreset::ALL.to_vec(),
            solver: SolverConfig::default(),
            mc: McConfig::default(),
        };
        match experiment {
            ExperimentName::Fig3 => Self {
                b_max_units: MARKOV_B_MAX_UNITS,
                // Mean harvested power of one step per slot.
                p_bar: 1.0,
                private: GainDistribution::Markov(presets::markov_private_chain()),
                common: GainDistribution::constant(presets::COMMON_GAIN).expect("valid"),
                eh: EhSpec::Constant { units: 1 },
                ..base
            },
            ExperimentName::Fig7 => Self {
                p_s_grid: vec![0.5],
                ..base
            },
            _ => base,
        }
    }

    /// Power of one energy step spent within one slot. With the default
    /// 1 mJ step and 1 ms slot this is 1.
    pub fn step_power(&self) -> f64 {
        self.delta / (self.slot_ms * 1e-3)
    }

    /// Harvest model for `eh`, in units of [`Self::step_power`].
    pub fn harvest(&self, eh: &EhSpec) -> Result<HarvestModel> {
        let step = self.step_power();
        let ctx = || "eh".to_string();
        match eh {
            EhSpec::Preset { name } => eh_preset(*name, &self.eh_presets, step)
                .and_then(|p| p.harvest_model(step))
                .context(ctx),
            EhSpec::Constant { units } => {
                HarvestModel::new(MarkovChain::constant(*units as f64 * step).context(ctx)?, step).context(ctx)
            }
            EhSpec::Chain { units, transition } => {
                HarvestModel::from_units(units.clone(), transition.clone(), step).context(ctx)
            }
        }
    }

    /// System model at securing probability `p_s` with harvest `eh`.
    pub fn model_with(&self, p_s: f64, eh: &EhSpec) -> Result<SystemModel> {
        let harvest = self.harvest(eh)?;
        let access = AccessModel::new(p_s).map_err(|e| CliError::config("p_s_grid", e.to_string()))?;
        SystemModel::new(
            self.private.clone(),
            self.common.clone(),
            access,
            harvest,
            self.step_power(),
            self.b_max_units,
        )
        .map(|m| m.with_rate_unit(self.log_base.rate_unit()))
        .context(|| format!("{} model at p_s = {p_s}", self.experiment))
    }

    pub fn model(&self, p_s: f64) -> Result<SystemModel> {
        self.model_with(p_s, &self.eh)
    }

    /// Solver settings with the Monte Carlo budget and seed applied.
    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            mc_periods: self.mc.periods,
            warmup_periods: self.mc.warmup,
            batches: self.mc.batches,
            seed: self.seed,
            ..self.solver.clone()
        }
    }

    pub fn sim_options(&self) -> savetx::sim::SimOptions {
        savetx::sim::SimOptions::from(&self.solver_config())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    fn validate(&self) -> Result<()> {
        let bad = |key: &str, reason: String| Err(CliError::config(key, reason));
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return bad("delta", format!("must be > 0, got {}", self.delta));
        }
        if !(self.slot_ms > 0.0 && self.slot_ms.is_finite()) {
            return bad("slot_ms", format!("must be > 0, got {}", self.slot_ms));
        }
        check_grid("p_s_grid", &self.p_s_grid)?;
        for (i, &p) in self.p_s_grid.iter().enumerate() {
            if !(0.0..=1.0).contains(&p) {
                return bad(&format!("p_s_grid[{i}]"), format!("p_s out of [0,1]: {p}"));
            }
        }
        if self.experiment == ExperimentName::Fig7 && self.p_s_grid.len() != 1 {
            return bad("p_s_grid", "fig7 compares harvest models at a single securing probability".into());
        }
        check_grid("gamma_grid", &self.gamma_grid)?;
        if let Some((i, g)) = self.gamma_grid.iter().enumerate().find(|(_, g)| **g < 0.0) {
            return bad(&format!("gamma_grid[{i}]"), format!("threshold must be >= 0, got {g}"));
        }
        if !(self.p_bar > 0.0 && self.p_bar.is_finite()) {
            return bad("p_bar", format!("must be > 0, got {}", self.p_bar));
        }
        if let Err(e) = self.private.validate() {
            return bad("private", e.to_string());
        }
        if let Err(e) = self.common.validate() {
            return bad("common", e.to_string());
        }
        if self.common.is_markov() {
            return bad("common", "the common-channel gain must be i.i.d.".into());
        }
        if self.eh_models.is_empty() {
            return bad("eh_models", "must not be empty".into());
        }
        if let Err(e) = self.solver.validate() {
            return bad("solver", e.to_string());
        }
        if self.mc.periods == 0 || self.mc.slots == 0 {
            return bad("mc", "periods and slots must be >= 1".into());
        }
        if self.mc.batches < 2 {
            return bad("mc.batches", "need at least 2 batches".into());
        }
        // Harvest steps must fit the battery model.
        self.harvest(&self.eh).map_err(|e| CliError::config("eh", e.to_string()))?;
        Ok(())
    }
}

fn check_grid(key: &str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(CliError::config(key, "grid must not be empty"));
    }
    if let Some(i) = grid.iter().position(|x| !x.is_finite()) {
        return Err(CliError::config(format!("{key}[{i}]"), "not a finite number"));
    }
    if let Some(i) = grid.windows(2).position(|w| w[1] <= w[0]) {
        return Err(CliError::config(
            format!("{key}[{}]", i + 1),
            "grid must be strictly increasing",
        ));
    }
    Ok(())
}

/// Parses and validates a config. `default_experiment` applies when the
/// text names none; when both are given they must agree.
pub fn validate_config(raw: &str, default_experiment: Option<ExperimentName>) -> Result<ExperimentConfig> {
    let de = toml::Deserializer::new(raw);
    let raw: RawConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let key = e.path().to_string();
        let inner = e.into_inner();
        CliError::config(if key == "." { String::new() } else { key }, inner.message().to_string())
    })?;
    let experiment = match (raw.experiment, default_experiment) {
        (Some(a), Some(b)) if a != b => {
            return Err(CliError::config(
                "experiment",
                format!("config is for `{a}` but `{b}` was requested"),
            ))
        }
        (Some(a), _) => a,
        (None, Some(b)) => b,
        (None, None) => ExperimentName::Custom,
    };
    let mut cfg = ExperimentConfig::defaults(experiment);
    if let Some(seed) = raw.seed {
        if seed < 0 {
            return Err(CliError::config("seed", format!("must be >= 0, got {seed}")));
        }
        cfg.seed = seed as u64;
    }
    macro_rules! take {
        ($($field:ident),*) => { $( if let Some(v) = raw.$field { cfg.$field = v; } )* };
    }
    take!(delta, slot_ms, p_s_grid, gamma_grid, p_bar, log_base, private, common, eh, eh_presets, eh_models, solver, mc);
    if let Some(BMax(n)) = raw.b_max_units {
        cfg.b_max_units = n;
    }
    cfg.validate()?;
    Ok(cfg)
}
