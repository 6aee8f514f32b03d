use serde::{Deserialize, Serialize};

/// Everything the transmitter knows at the start of a slot: access to the
/// common channel, stored energy, the previous slot's harvest and both
/// channel gains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemState {
    /// Whether the common channel is held this slot.
    pub phi: bool,
    /// Battery energy, a multiple of the energy step.
    pub battery: f64,
    /// Energy harvested during the previous slot.
    pub e_prev: f64,
    pub h: f64,
    pub h_common: f64,
}

impl SystemState {
    pub fn new(phi: bool, battery: f64, e_prev: f64, h: f64, h_common: f64) -> Self {
        Self {
            phi,
            battery,
            e_prev,
            h,
            h_common,
        }
    }
}
