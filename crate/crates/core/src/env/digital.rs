//! Small two-action task for exhaustive cross-checks: each bit selects free
//! evolution or a fixed drive for one short step of the single-transmon
//! Hamiltonian, and the target is the operator of one hidden bit string.

use serde::{Deserialize, Serialize};

use super::UnitaryTableEnv;
use crate::error::{Error, Result};
use crate::quantum::{propagator, time_ordered_product, ControlSystem, UnitaryOperator};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DigitalConfig {
    /// Seconds per bit.
    pub step_duration: f64,
    /// Drive of a 1 bit as a fraction of the maximum drive.
    pub drive_fraction: f64,
    /// Hidden optimum, e.g. "10110010"; its length sets the horizon.
    pub target_bits: String,
}

impl Default for DigitalConfig {
    fn default() -> Self {
        Self {
            step_duration: 0.4e-9,
            drive_fraction: 0.25,
            target_bits: "10110010".into(),
        }
    }
}

impl DigitalConfig {
    pub fn bits(&self) -> Result<Vec<usize>> {
        if self.target_bits.is_empty() {
            return Err(Error::InvalidInput("target bit string is empty".into()));
        }
        self.target_bits
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::InvalidInput(format!("`{other}` is not a bit"))),
            })
            .collect()
    }
}

pub fn digital_environment(system: &ControlSystem, config: &DigitalConfig) -> Result<UnitaryTableEnv> {
    let bits = config.bits()?;
    let drive = config.drive_fraction * system.max_drive();
    let u0 = UnitaryOperator::new(propagator(&system.hamiltonian(0.0)?, config.step_duration)?)?;
    let u1 = UnitaryOperator::new(propagator(&system.hamiltonian(drive)?, config.step_duration)?)?;
    let actions = vec![u0, u1];
    let target = time_ordered_product(system.dim(), bits.iter().map(|&b| &actions[b]));
    UnitaryTableEnv::new("digital", actions, bits.len(), target, config.step_duration)
}
