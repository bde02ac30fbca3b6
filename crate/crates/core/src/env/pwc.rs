use serde::{Deserialize, Serialize};

use super::UnitaryTableEnv;
use crate::error::{Error, Result};
use crate::quantum::{propagator, ControlSystem, UnitaryOperator};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PwcConfig {
    /// Seconds.
    pub step_duration: f64,
    pub amplitude_levels: usize,
}

impl Default for PwcConfig {
    fn default() -> Self {
        Self {
            step_duration: 2.0e-9,
            amplitude_levels: 60,
        }
    }
}

/// `levels` equally spaced amplitudes from 0 to `max`, both included.
pub fn amplitude_grid(levels: usize, max: f64) -> Vec<f64> {
    match levels {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..levels)
            .map(|k| if k + 1 == levels { max } else { max * k as f64 / (levels - 1) as f64 })
            .collect(),
    }
}

/// Number of whole steps of length `step` in `duration`.
pub(crate) fn whole_steps(duration: f64, step: f64) -> Result<usize> {
    if !(duration > 0.0 && step > 0.0) {
        return Err(Error::Domain(format!(
            "duration {duration:e} and step {step:e} must be positive"
        )));
    }
    let ratio = duration / step;
    let n = ratio.round();
    if n < 1.0 || (ratio - n).abs() > 1e-6 {
        return Err(Error::Domain(format!(
            "duration {duration:e} s is not a whole number of {step:e} s steps"
        )));
    }
    Ok(n as usize)
}

pub fn pwc_environment(
    system: &ControlSystem,
    target: UnitaryOperator,
    config: &PwcConfig,
    duration: f64,
) -> Result<UnitaryTableEnv> {
    if config.amplitude_levels < 2 {
        return Err(Error::Domain("need at least two amplitude levels".into()));
    }
    let horizon = whole_steps(duration, config.step_duration)?;
    let grid = amplitude_grid(config.amplitude_levels, system.max_drive());
    let actions = grid
        .iter()
        .map(|&a| Ok(UnitaryOperator::new(propagator(&system.hamiltonian(a)?, config.step_duration)?)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(UnitaryTableEnv::new("pwc", actions, horizon, target, config.step_duration)?.with_amplitudes(grid))
}
