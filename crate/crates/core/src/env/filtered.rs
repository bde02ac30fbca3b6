//! Bandwidth-limited analog pulses.
//!
//! The piecewise-constant pulse is smoothed by the Gaussian filter, so the
//! waveform inside one step depends on its neighbours. Steps are therefore
//! propagated from the middle of the previous step to the middle of the
//! current one, using a table indexed by the (previous, current) amplitude
//! pair and ignoring contributions from pulses further away. Half-step caps
//! close the sequence at both ends.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::pwc::{amplitude_grid, whole_steps};
use super::{ControlEnvironment, EnvState};
use crate::error::{Error, Result};
use crate::quantum::filter::filtered_value;
use crate::quantum::propagate::evolve_samples_unchecked;
use crate::quantum::{ControlSystem, UnitaryOperator};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FilteredConfig {
    /// Seconds.
    pub step_duration: f64,
    /// Filter width in seconds.
    pub sigma: f64,
    pub amplitude_levels: usize,
    /// Substeps per step used when building the tables; must be even.
    pub resolution: usize,
}

impl Default for FilteredConfig {
    fn default() -> Self {
        Self {
            step_duration: 4.0e-9,
            sigma: 0.7e-9,
            amplitude_levels: 60,
            resolution: 200,
        }
    }
}

impl FilteredConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_duration > 0.0 && self.sigma > 0.0) {
            return Err(Error::Domain("step duration and filter width must be positive".into()));
        }
        if self.amplitude_levels < 2 {
            return Err(Error::Domain("need at least two amplitude levels".into()));
        }
        if self.resolution < 2 || self.resolution % 2 != 0 {
            return Err(Error::Domain(format!(
                "resolution must be even and >= 2, got {}",
                self.resolution
            )));
        }
        Ok(())
    }
}

/// Evolution over `[t0, t1]` of the filtered waveform of `amps`.
fn window_unitary(
    system: &ControlSystem,
    amps: &[f64],
    config: &FilteredConfig,
    t0: f64,
    t1: f64,
    substeps: usize,
) -> Result<UnitaryOperator> {
    let dt = (t1 - t0) / substeps as f64;
    let max = system.max_drive();
    let samples: Vec<f64> = (0..substeps)
        .map(|m| {
            let t = t0 + (m as f64 + 0.5) * dt;
            filtered_value(amps, config.step_duration, config.sigma, t).clamp(0.0, max)
        })
        .collect();
    evolve_samples_unchecked(system, &samples, dt)
}

/// Precomputed unitaries shared by filtered environments of any horizon.
#[derive(Debug)]
pub struct FilteredTables {
    pub config: FilteredConfig,
    pub amplitudes: Vec<f64>,
    /// `[0, T/2]` of a lone pulse, per amplitude.
    pub start_cap: Vec<UnitaryOperator>,
    /// `[0, T]` of a lone pulse, for one-step sequences.
    pub single: Vec<UnitaryOperator>,
    /// `[T/2, 3T/2]` of the pulse pair `(a_i, a_j)`, at `i * n + j`.
    pub pair: Vec<UnitaryOperator>,
    /// Pair window followed by the closing cap `[3T/2, 2T]`, at `i * n + j`.
    pub pair_final: Vec<UnitaryOperator>,
}

impl FilteredTables {
    pub fn levels(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn pair(&self, i: usize, j: usize) -> &UnitaryOperator {
        &self.pair[i * self.levels() + j]
    }

    pub fn pair_final(&self, i: usize, j: usize) -> &UnitaryOperator {
        &self.pair_final[i * self.levels() + j]
    }

    /// Step unitaries for a whole action sequence, in application order.
    pub fn sequence_unitaries<'a>(&'a self, actions: &[usize]) -> Vec<&'a UnitaryOperator> {
        let n = actions.len();
        (0..n)
            .map(|k| match (k, n) {
                (0, 1) => &self.single[actions[0]],
                (0, _) => &self.start_cap[actions[0]],
                (k, n) if k + 1 == n => self.pair_final(actions[k - 1], actions[k]),
                (k, _) => self.pair(actions[k - 1], actions[k]),
            })
            .collect()
    }

    pub fn to_flat(&self) -> Vec<UnitaryOperator> {
        let mut out = Vec::with_capacity(2 * self.levels() + 2 * self.pair.len());
        out.extend(self.start_cap.iter().cloned());
        out.extend(self.single.iter().cloned());
        out.extend(self.pair.iter().cloned());
        out.extend(self.pair_final.iter().cloned());
        out
    }

    pub fn from_flat(config: FilteredConfig, amplitudes: Vec<f64>, mut flat: Vec<UnitaryOperator>) -> Result<Self> {
        let n = amplitudes.len();
        if flat.len() != 2 * n + 2 * n * n {
            return Err(Error::InvalidInput(format!(
                "expected {} table entries, found {}",
                2 * n + 2 * n * n,
                flat.len()
            )));
        }
        let pair_final = flat.split_off(2 * n + n * n);
        let pair = flat.split_off(2 * n);
        let single = flat.split_off(n);
        Ok(Self {
            config,
            amplitudes,
            start_cap: flat,
            single,
            pair,
            pair_final,
        })
    }
}

/// Builds every table entry; the pair table holds `levels^2` unitaries.
pub fn filtered_pair_table(system: &ControlSystem, config: &FilteredConfig) -> Result<FilteredTables> {
    config.validate()?;
    let amplitudes = amplitude_grid(config.amplitude_levels, system.max_drive());
    let t = config.step_duration;
    let r = config.resolution;
    let start_cap = amplitudes
        .par_iter()
        .map(|&a| window_unitary(system, &[a], config, 0.0, 0.5 * t, r / 2))
        .collect::<Result<Vec<_>>>()?;
    let single = amplitudes
        .par_iter()
        .map(|&a| window_unitary(system, &[a], config, 0.0, t, r))
        .collect::<Result<Vec<_>>>()?;
    let n = amplitudes.len();
    let entries = (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let amps = [amplitudes[idx / n], amplitudes[idx % n]];
            let mid = window_unitary(system, &amps, config, 0.5 * t, 1.5 * t, r)?;
            let cap = window_unitary(system, &amps, config, 1.5 * t, 2.0 * t, r / 2)?;
            let closed = mid.then(&cap);
            Ok((mid, closed))
        })
        .collect::<Result<Vec<_>>>()?;
    let (pair, pair_final) = entries.into_iter().unzip();
    Ok(FilteredTables {
        config: *config,
        amplitudes,
        start_cap,
        single,
        pair,
        pair_final,
    })
}

/// Filtered task whose step unitary depends on the previous action.
pub struct FilteredEnv {
    tables: Arc<FilteredTables>,
    horizon: usize,
    target: UnitaryOperator,
}

impl FilteredEnv {
    pub fn tables(&self) -> &Arc<FilteredTables> {
        &self.tables
    }
}

pub fn filtered_environment(tables: Arc<FilteredTables>, target: UnitaryOperator, duration: f64) -> Result<FilteredEnv> {
    let horizon = whole_steps(duration, tables.config.step_duration)?;
    if target.dim() != tables.single[0].dim() {
        return Err(Error::Dimension("target does not match the table dimension".into()));
    }
    Ok(FilteredEnv {
        tables,
        horizon,
        target,
    })
}

impl ControlEnvironment for FilteredEnv {
    fn name(&self) -> &str {
        "filtered"
    }

    fn action_count(&self) -> usize {
        self.tables.levels()
    }

    fn horizon(&self) -> usize {
        self.horizon
    }

    fn target(&self) -> &UnitaryOperator {
        &self.target
    }

    fn step_unitary(&self, state: &EnvState, action: usize) -> &UnitaryOperator {
        let last = state.step + 1 == self.horizon;
        match state.last_action {
            None if last => &self.tables.single[action],
            None => &self.tables.start_cap[action],
            Some(prev) if last => self.tables.pair_final(prev, action),
            Some(prev) => self.tables.pair(prev, action),
        }
    }

    fn amplitude_levels(&self) -> Option<&[f64]> {
        Some(&self.tables.amplitudes)
    }

    fn step_duration(&self) -> f64 {
        self.tables.config.step_duration
    }
}
