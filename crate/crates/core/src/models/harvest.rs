use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::markov::MarkovChain;
use crate::error::{Error, Result};

/// Harvested energy per slot, a Markov chain over multiples of the energy
/// step `delta`.
#[derive(Debug, Clone, PartialEq)]
pub struct HarvestModel {
    chain: MarkovChain,
    units: Vec<u32>,
}

impl HarvestModel {
    pub fn new(chain: MarkovChain, delta: f64) -> Result<Self> {
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::InvalidModel(format!("energy step {delta} must be > 0")));
        }
        let units = chain
            .states()
            .iter()
            .map(|&e| {
                let k = (e / delta).round();
                if (k * delta - e).abs() > 1e-9 * delta.max(e) || k > u32::MAX as f64 {
                    Err(Error::InvalidModel(format!(
                        "harvested energy {e} is not a multiple of the step {delta}"
                    )))
                } else {
                    Ok(k as u32)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { chain, units })
    }

    /// Builds the chain directly from step counts.
    pub fn from_units(units: Vec<u32>, transition: Vec<Vec<f64>>, delta: f64) -> Result<Self> {
        let states = units.iter().map(|&k| k as f64 * delta).collect();
        Self::new(MarkovChain::new(states, transition)?, delta)
    }

    pub fn chain(&self) -> &MarkovChain {
        &self.chain
    }

    pub fn units(&self) -> &[u32] {
        &self.units
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }
}

/// The four two-state EH models compared in the EH-diversity experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EhPreset {
    A,
    B,
    C,
    D,
}

impl EhPreset {
    pub const ALL: [EhPreset; 4] = [EhPreset::A, EhPreset::B, EhPreset::C, EhPreset::D];

    pub fn as_str(self) -> &'static str {
        match self {
            EhPreset::A => "a",
            EhPreset::B => "b",
            EhPreset::C => "c",
            EhPreset::D => "d",
        }
    }
}

impl fmt::Display for EhPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EhPreset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "a" | "A" => Ok(EhPreset::A),
            "b" | "B" => Ok(EhPreset::B),
            "c" | "C" => Ok(EhPreset::C),
            "d" | "D" => Ok(EhPreset::D),
            other => Err(Error::BadName(other.to_string())),
        }
    }
}

/// Switching probabilities of the EH presets. States are ordered
/// (BAD = 0, GOOD = `good_units` steps).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EhPresetParams {
    pub good_units: u32,
    /// Model (a): probability of switching state, both directions.
    pub a_switch: f64,
    /// Model (b): switches more often than (a).
    pub b_switch: f64,
    /// Model (c): switches less often than (a).
    pub c_switch: f64,
    /// Model (d): BAD -> GOOD and GOOD -> BAD probabilities.
    pub d_bad_to_good: f64,
    pub d_good_to_bad: f64,
}

impl Default for EhPresetParams {
    fn default() -> Self {
        // d: stationary P(GOOD) = 0.6 / (0.6 + 0.2) = 0.75.
        Self {
            good_units: 4,
            a_switch: 0.5,
            b_switch: 0.9,
            c_switch: 0.1,
            d_bad_to_good: 0.6,
            d_good_to_bad: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EhModelPreset {
    pub name: EhPreset,
    pub chain: MarkovChain,
}

impl EhModelPreset {
    pub fn harvest_model(&self, delta: f64) -> Result<HarvestModel> {
        HarvestModel::new(self.chain.clone(), delta)
    }
}

pub fn make_eh_preset(name: &str, params: &EhPresetParams, delta: f64) -> Result<EhModelPreset> {
    let name: EhPreset = name.parse()?;
    eh_preset(name, params, delta)
}

pub fn eh_preset(name: EhPreset, params: &EhPresetParams, delta: f64) -> Result<EhModelPreset> {
    let states = [0.0, params.good_units as f64 * delta];
    let chain = match name {
        EhPreset::A => MarkovChain::two_state(states, params.a_switch, params.a_switch)?,
        EhPreset::B => MarkovChain::two_state(states, params.b_switch, params.b_switch)?,
        EhPreset::C => MarkovChain::two_state(states, params.c_switch, params.c_switch)?,
        EhPreset::D => MarkovChain::two_state(states, params.d_bad_to_good, params.d_good_to_bad)?,
    };
    Ok(EhModelPreset { name, chain })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_a_is_iid_half() {
        let p = make_eh_preset("a", &EhPresetParams::default(), 1e-3).unwrap();
        assert_eq!(p.chain.transition(), &[vec![0.5, 0.5], vec![0.5, 0.5]]);
        assert_eq!(p.chain.states(), &[0.0, 4e-3]);
        assert!(p.chain.is_iid());
    }

    #[test]
    fn presets_share_stationary_distribution() {
        let params = EhPresetParams::default();
        for name in ["a", "b", "c"] {
            let p = make_eh_preset(name, &params, 1.0).unwrap();
            let pi = p.chain.stationary_distribution().unwrap();
            assert!((pi[0] - 0.5).abs() < 1e-12 && (pi[1] - 0.5).abs() < 1e-12, "{name}: {pi:?}");
        }
        let d = make_eh_preset("d", &params, 1.0).unwrap();
        let pi = d.chain.stationary_distribution().unwrap();
        assert!(pi[1] > 0.5);
        assert!((pi[1] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn switching_order() {
        let params = EhPresetParams::default();
        let switch = |n: &str| make_eh_preset(n, &params, 1.0).unwrap().chain.row(0)[1];
        assert!(switch("b") > switch("a") && switch("a") > switch("c"));
    }

    #[test]
    fn bad_name() {
        assert_eq!(
            make_eh_preset("e", &EhPresetParams::default(), 1.0).unwrap_err(),
            Error::BadName("e".into())
        );
    }

    #[test]
    fn harvest_units() {
        let h = HarvestModel::from_units(vec![0, 4], vec![vec![0.5, 0.5]; 2], 1e-3).unwrap();
        assert_eq!(h.units(), &[0, 4]);
        let off_grid = MarkovChain::constant(1.5e-3).unwrap();
        assert!(HarvestModel::new(off_grid, 1e-3).is_err());
    }
}
