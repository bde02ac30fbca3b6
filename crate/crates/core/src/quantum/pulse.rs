use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Piecewise-constant drive: one amplitude (rad/s) per step of
/// `step_duration` seconds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseSequence {
    pub amplitudes: Vec<f64>,
    pub step_duration: f64,
}

impl PulseSequence {
    pub fn new(amplitudes: Vec<f64>, step_duration: f64) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidInput("pulse must have at least one step".into()));
        }
        if !(step_duration.is_finite() && step_duration > 0.0) {
            return Err(Error::Domain(format!("step duration must be positive, got {step_duration:e}")));
        }
        if let Some(a) = amplitudes.iter().find(|a| !a.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite amplitude {a}")));
        }
        Ok(Self {
            amplitudes,
            step_duration,
        })
    }

    /// Same as [`PulseSequence::new`] plus the `[0, max]` amplitude bound.
    pub fn bounded(amplitudes: Vec<f64>, step_duration: f64, max: f64) -> Result<Self> {
        for &a in &amplitudes {
            crate::quantum::hamiltonian::check_drive(a, max)?;
        }
        Self::new(amplitudes, step_duration)
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn total_duration(&self) -> f64 {
        self.amplitudes.len() as f64 * self.step_duration
    }

    pub fn reversed(&self) -> Self {
        let mut amplitudes = self.amplitudes.clone();
        amplitudes.reverse();
        Self {
            amplitudes,
            step_duration: self.step_duration,
        }
    }
}
