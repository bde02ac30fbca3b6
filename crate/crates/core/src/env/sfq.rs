//! Single-flux-quantum pulse trains.
//!
//! Every 2 ps clock slot either carries one Gaussian flux pulse or nothing,
//! so a gate is a bit string. For the tree search the bits are grouped into
//! blocks of 500 and each of the 60 actions is a fixed block drawn with a
//! pulse probability that rises linearly with the action index.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{BitObjective, UnitaryTableEnv};
use crate::error::{Error, Result};
use crate::quantum::fidelity::fidelity_unchecked;
use crate::quantum::propagate::evolve_samples_unchecked;
use crate::quantum::{propagator, time_ordered_product, ControlSystem, UnitaryOperator};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SfqConfig {
    /// Clock period in seconds.
    pub pulse_spacing: f64,
    /// Gaussian width in seconds.
    pub pulse_width: f64,
    /// Pulse area (rotation angle) in radians.
    pub pulse_area: f64,
    pub block_length: usize,
    pub macro_action_count: usize,
    /// Substeps used to integrate the pulse over one clock period.
    pub substeps: usize,
}

impl Default for SfqConfig {
    fn default() -> Self {
        Self {
            pulse_spacing: 2.0e-12,
            pulse_width: 0.25e-12,
            pulse_area: std::f64::consts::TAU / 1000.0,
            block_length: 500,
            macro_action_count: 60,
            substeps: 200,
        }
    }
}

impl SfqConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.pulse_spacing > 0.0 && self.pulse_width > 0.0 && self.pulse_area >= 0.0) {
            return Err(Error::Domain("SFQ spacing and width must be positive, area non-negative".into()));
        }
        if self.block_length == 0 || self.macro_action_count < 2 {
            return Err(Error::Domain("need block_length >= 1 and at least two macro-actions".into()));
        }
        if self.substeps < 100 {
            return Err(Error::Domain(format!("SFQ pulse needs >= 100 substeps, got {}", self.substeps)));
        }
        Ok(())
    }

    /// Drive of the pulse at time `t` within one clock period.
    pub fn pulse_drive(&self, t: f64) -> f64 {
        let tau = self.pulse_width;
        let x = (t - 0.5 * self.pulse_spacing) / tau;
        self.pulse_area / ((2.0 * std::f64::consts::PI).sqrt() * tau) * (-0.5 * x * x).exp()
    }

    /// Decision steps for a gate of `duration` seconds.
    pub fn horizon(&self, duration: f64) -> Result<usize> {
        super::pwc::whole_steps(duration, self.block_length as f64 * self.pulse_spacing)
    }
}

/// Free evolution `U0` and single-pulse evolution `U1` over one clock period.
pub fn sfq_base_unitaries(system: &ControlSystem, config: &SfqConfig) -> Result<(UnitaryOperator, UnitaryOperator)> {
    config.validate()?;
    let u0 = UnitaryOperator::new(propagator(&system.drift, config.pulse_spacing)?)?;
    let dt = config.pulse_spacing / config.substeps as f64;
    // The peak drive of a picosecond pulse is far above the analog bound, so
    // the range check does not apply here.
    let samples: Vec<f64> = (0..config.substeps)
        .map(|m| config.pulse_drive((m as f64 + 0.5) * dt))
        .collect();
    let u1 = evolve_samples_unchecked(system, &samples, dt)?;
    Ok((u0, u1))
}

/// Fixed bit blocks and their unitaries.
#[derive(Clone, Debug)]
pub struct SfqMacroActions {
    pub bits: Vec<Vec<u8>>,
    pub unitaries: Vec<UnitaryOperator>,
}

/// Draws the macro-action blocks. Block `i` (1-based) has each bit equal to 0
/// with probability `(M - i) / (M - 1)`.
pub fn sfq_macro_actions(
    base: &(UnitaryOperator, UnitaryOperator),
    config: &SfqConfig,
    seed: u64,
) -> Result<SfqMacroActions> {
    config.validate()?;
    let m = config.macro_action_count;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bits = Vec::with_capacity(m);
    let mut unitaries = Vec::with_capacity(m);
    let dim = base.0.dim();
    for i in 1..=m {
        let p_zero = (m - i) as f64 / (m - 1) as f64;
        let block: Vec<u8> = (0..config.block_length)
            .map(|_| u8::from(rng.gen::<f64>() >= p_zero))
            .collect();
        let u = time_ordered_product(dim, block.iter().map(|&b| if b == 0 { &base.0 } else { &base.1 }));
        bits.push(block);
        unitaries.push(u);
    }
    Ok(SfqMacroActions { bits, unitaries })
}

/// SFQ task over macro-actions for a gate of `duration` seconds.
pub fn sfq_environment(
    system: &ControlSystem,
    target: UnitaryOperator,
    config: &SfqConfig,
    duration: f64,
    seed: u64,
) -> Result<UnitaryTableEnv> {
    let horizon = config.horizon(duration)?;
    let base = sfq_base_unitaries(system, config)?;
    let macros = sfq_macro_actions(&base, config, seed)?;
    UnitaryTableEnv::new(
        "sfq",
        macros.unitaries,
        horizon,
        target,
        config.block_length as f64 * config.pulse_spacing,
    )
}

/// Fidelity of a raw bit string, one clock period per bit.
#[derive(Clone, Debug)]
pub struct SfqBitObjective {
    u0: UnitaryOperator,
    u1: UnitaryOperator,
    target: UnitaryOperator,
    bits: usize,
}

impl SfqBitObjective {
    pub fn new(
        system: &ControlSystem,
        target: UnitaryOperator,
        config: &SfqConfig,
        duration: f64,
    ) -> Result<Self> {
        let bits = super::pwc::whole_steps(duration, config.pulse_spacing)?;
        let (u0, u1) = sfq_base_unitaries(system, config)?;
        if target.dim() != u0.dim() {
            return Err(Error::Dimension("target does not match the system dimension".into()));
        }
        Ok(Self { u0, u1, target, bits })
    }

    pub fn unitary(&self, bits: &[u8]) -> UnitaryOperator {
        time_ordered_product(self.u0.dim(), bits.iter().map(|&b| if b == 0 { &self.u0 } else { &self.u1 }))
    }
}

impl BitObjective for SfqBitObjective {
    fn bit_count(&self) -> usize {
        self.bits
    }

    fn fitness(&self, bits: &[u8]) -> f64 {
        fidelity_unchecked(&self.unitary(bits), &self.target)
    }
}
