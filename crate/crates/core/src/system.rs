use crate::error::{Error, Result};
use crate::models::{AccessModel, GainDistribution, HarvestModel};
use crate::power::RateUnit;
use crate::state::SystemState;

/// Everything that defines one uplink: channel and access models, the
/// harvesting process and the battery.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemModel {
    private: GainDistribution,
    common: GainDistribution,
    access: AccessModel,
    harvest: HarvestModel,
    delta: f64,
    b_max_units: u32,
    rate_unit: RateUnit,
}

impl SystemModel {
    pub fn new(
        private: GainDistribution,
        common: GainDistribution,
        access: AccessModel,
        harvest: HarvestModel,
        delta: f64,
        b_max_units: u32,
    ) -> Result<Self> {
        private.validate()?;
        common.validate()?;
        if common.is_markov() {
            return Err(Error::InvalidModel(
                "the common-channel gain must be i.i.d. across slots".into(),
            ));
        }
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::InvalidModel(format!("energy step {delta} must be > 0")));
        }
        if b_max_units == 0 {
            return Err(Error::InvalidModel("battery capacity must be at least one step".into()));
        }
        // Re-derive the step counts so they agree with `delta`.
        let harvest = HarvestModel::new(harvest.chain().clone(), delta)?;
        Ok(Self {
            private,
            common,
            access,
            harvest,
            delta,
            b_max_units,
            rate_unit: RateUnit::Bits,
        })
    }

    pub fn with_rate_unit(mut self, unit: RateUnit) -> Self {
        self.rate_unit = unit;
        self
    }

    pub fn with_access(mut self, access: AccessModel) -> Self {
        self.access = access;
        self
    }

    pub fn with_harvest(mut self, harvest: HarvestModel) -> Result<Self> {
        self.harvest = HarvestModel::new(harvest.chain().clone(), self.delta)?;
        Ok(self)
    }

    pub fn with_b_max_units(mut self, b_max_units: u32) -> Result<Self> {
        if b_max_units == 0 {
            return Err(Error::InvalidModel("battery capacity must be at least one step".into()));
        }
        self.b_max_units = b_max_units;
        Ok(self)
    }

    pub fn private(&self) -> &GainDistribution {
        &self.private
    }

    pub fn common(&self) -> &GainDistribution {
        &self.common
    }

    pub fn access(&self) -> &AccessModel {
        &self.access
    }

    pub fn harvest(&self) -> &HarvestModel {
        &self.harvest
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn b_max_units(&self) -> u32 {
        self.b_max_units
    }

    pub fn capacity(&self) -> f64 {
        self.b_max_units as f64 * self.delta
    }

    pub fn rate_unit(&self) -> RateUnit {
        self.rate_unit
    }

    /// Private gain and harvest both i.i.d., the setting where a pure
    /// rate threshold is optimal.
    pub fn is_iid(&self) -> bool {
        let private_iid = match &self.private {
            GainDistribution::Markov(chain) => chain.is_iid(),
            _ => true,
        };
        private_iid && self.harvest.chain().is_iid()
    }

    pub fn rate(&self, state: &SystemState) -> f64 {
        crate::power::rate_at_stop(state, self.rate_unit)
    }
}
