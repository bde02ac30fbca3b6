//! Gaussian bandwidth filter.
//!
//! The kernel `exp(-(t - t')^2 / sigma^2)` is divided by its integral
//! `sigma sqrt(pi)`, and the pulse is taken to be zero outside `[0, T]`.
//! For a piecewise-constant input the convolution is a sum of `erf`
//! differences, so sampling needs no quadrature.

use libm::erf;

use super::hamiltonian::ControlSystem;
use super::fidelity::fidelity;
use super::matrix::UnitaryOperator;
use super::propagate::evolve_samples;
use super::pulse::PulseSequence;
use crate::error::{Error, Result};

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::Domain(format!("filter width must be positive, got {sigma:e}")));
    }
    Ok(())
}

/// Weight of step `[start, end)` in the filtered value at time `t`.
#[inline]
pub fn window_weight(t: f64, start: f64, end: f64, sigma: f64) -> f64 {
    0.5 * (erf((t - start) / sigma) - erf((t - end) / sigma))
}

/// Filtered amplitude at an arbitrary time `t`.
pub fn filtered_value(amplitudes: &[f64], step: f64, sigma: f64, t: f64) -> f64 {
    amplitudes
        .iter()
        .enumerate()
        .map(|(k, &a)| a * window_weight(t, k as f64 * step, (k + 1) as f64 * step, sigma))
        .sum()
}

/// Midpoints of `resolution` equal substeps in every step.
pub fn sample_times(steps: usize, step: f64, resolution: usize) -> Vec<f64> {
    let dt = step / resolution as f64;
    (0..steps * resolution).map(|m| (m as f64 + 0.5) * dt).collect()
}

/// Linear map from step amplitudes to substep samples; row `m` holds the
/// weight of every step in sample `m`.
#[derive(Clone, Debug)]
pub struct FilterWeights {
    pub steps: usize,
    pub resolution: usize,
    pub weights: Vec<Vec<f64>>,
}

impl FilterWeights {
    pub fn new(steps: usize, step: f64, sigma: f64, resolution: usize) -> Result<Self> {
        check_sigma(sigma)?;
        if resolution == 0 {
            return Err(Error::Domain("resolution must be >= 1".into()));
        }
        let weights = sample_times(steps, step, resolution)
            .into_iter()
            .map(|t| {
                (0..steps)
                    .map(|k| window_weight(t, k as f64 * step, (k + 1) as f64 * step, sigma))
                    .collect()
            })
            .collect();
        Ok(Self {
            steps,
            resolution,
            weights,
        })
    }

    pub fn apply(&self, amplitudes: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .map(|row| row.iter().zip(amplitudes).map(|(w, a)| w * a).sum())
            .collect()
    }

    /// Pulls a gradient over samples back onto the step amplitudes.
    pub fn pull_back(&self, sample_gradient: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.steps];
        for (row, g) in self.weights.iter().zip(sample_gradient) {
            for (o, w) in out.iter_mut().zip(row) {
                *o += w * g;
            }
        }
        out
    }
}

/// Filtered pulse sampled at `resolution` points per step.
pub fn gaussian_filter(pulse: &PulseSequence, sigma: f64, resolution: usize) -> Result<Vec<f64>> {
    let w = FilterWeights::new(pulse.len(), pulse.step_duration, sigma, resolution)?;
    Ok(w.apply(&pulse.amplitudes))
}

/// Unitary of the filtered pulse held constant over each substep.
pub fn filtered_unitary(
    system: &ControlSystem,
    pulse: &PulseSequence,
    sigma: f64,
    resolution: usize,
) -> Result<UnitaryOperator> {
    let samples = gaussian_filter(pulse, sigma, resolution)?;
    // Clamp rounding overshoot; the kernel mass never exceeds one.
    let max = system.max_drive();
    let samples: Vec<f64> = samples.into_iter().map(|s| s.clamp(0.0, max)).collect();
    evolve_samples(system, &samples, pulse.step_duration / resolution as f64)
}

/// Infidelity between the unitary at `resolution` and at `reference_resolution`.
pub fn discretization_error(
    system: &ControlSystem,
    pulse: &PulseSequence,
    sigma: f64,
    resolution: usize,
    reference_resolution: usize,
) -> Result<f64> {
    if resolution == 0 || reference_resolution == 0 {
        return Err(Error::Domain("resolution must be >= 1".into()));
    }
    if resolution == reference_resolution {
        return Ok(0.0);
    }
    let u = filtered_unitary(system, pulse, sigma, resolution)?;
    let reference = filtered_unitary(system, pulse, sigma, reference_resolution)?;
    Ok((1.0 - fidelity(&u, &reference)?).max(0.0))
}

/// Errors for every resolution against a reference at four times the largest.
pub fn discretization_errors(
    system: &ControlSystem,
    pulse: &PulseSequence,
    sigma: f64,
    resolutions: &[usize],
) -> Result<Vec<f64>> {
    let largest = resolutions
        .iter()
        .copied()
        .max()
        .ok_or_else(|| Error::InvalidInput("no resolutions given".into()))?;
    let reference = filtered_unitary(system, pulse, sigma, 4 * largest)?;
    resolutions
        .iter()
        .map(|&r| {
            let u = filtered_unitary(system, pulse, sigma, r)?;
            Ok((1.0 - fidelity(&u, &reference)?).max(0.0))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_pulse_stays_constant_in_the_interior() {
        let step = 4e-9;
        let pulse = PulseSequence::new(vec![1.0; 12], step).unwrap();
        let samples = gaussian_filter(&pulse, 0.7e-9, 10).unwrap();
        // Samples at least 3 ns (> 4 sigma) away from both edges.
        let times = sample_times(12, step, 10);
        for (t, s) in times.iter().zip(&samples) {
            if *t > 6e-9 && *t < 12.0 * step - 6e-9 {
                assert!((s - 1.0).abs() < 1e-9, "t = {t:e}: {s}");
            }
        }
    }

    #[test]
    fn palindromes_filter_to_palindromes() {
        let pulse = PulseSequence::new(vec![0.2, 0.9, 0.4, 0.9, 0.2], 4e-9).unwrap();
        let s = gaussian_filter(&pulse, 0.7e-9, 7).unwrap();
        let n = s.len();
        for i in 0..n {
            assert!((s[i] - s[n - 1 - i]).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_width() {
        let pulse = PulseSequence::new(vec![1.0], 4e-9).unwrap();
        assert!(matches!(gaussian_filter(&pulse, 0.0, 4), Err(Error::Domain(_))));
        assert!(matches!(gaussian_filter(&pulse, -1.0, 4), Err(Error::Domain(_))));
    }

    #[test]
    fn pull_back_is_the_transpose() {
        let w = FilterWeights::new(3, 4e-9, 0.7e-9, 5).unwrap();
        let a = [0.3, -1.2, 0.8];
        let g: Vec<f64> = (0..15).map(|i| (i as f64 * 0.37).sin()).collect();
        let lhs: f64 = w.apply(&a).iter().zip(&g).map(|(x, y)| x * y).sum();
        let rhs: f64 = w.pull_back(&g).iter().zip(&a).map(|(x, y)| x * y).sum();
        assert!((lhs - rhs).abs() < 1e-14);
    }
}
