//! Effective driven two-transmon Hamiltonian
//! `H = D b1^dag b1 + J (b1^dag b2 + b1 b2^dag) + W (b1^dag + b1)`.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};

/// Physical parameters. Angular frequencies are in rad/s.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemParameters {
    pub detuning: f64,
    pub coupling: f64,
    pub max_drive: f64,
    pub levels_per_transmon: usize,
    /// 2 for the coupled pair; 1 keeps only the driven transmon.
    pub transmons: usize,
}

impl SystemParameters {
    /// Detuning 0.35 GHz, coupling 5 MHz and drive bound 1 GHz (all over 2 pi),
    /// two-level transmons.
    pub fn cross_resonance() -> Self {
        Self {
            detuning: TAU * 0.35e9,
            coupling: TAU * 5.0e6,
            max_drive: TAU * 1.0e9,
            levels_per_transmon: 2,
            transmons: 2,
        }
    }

    /// The driven transmon alone, same detuning and drive bound.
    pub fn single_transmon() -> Self {
        Self {
            coupling: 0.0,
            transmons: 1,
            ..Self::cross_resonance()
        }
    }

    pub fn dim(&self) -> usize {
        self.levels_per_transmon.pow(self.transmons as u32)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Domain(format!("{name} must be positive, got {v}")))
            }
        };
        positive("detuning", self.detuning)?;
        positive("max_drive", self.max_drive)?;
        if !(self.coupling.is_finite() && self.coupling >= 0.0) {
            return Err(Error::Domain(format!("coupling must be >= 0, got {}", self.coupling)));
        }
        if self.levels_per_transmon < 2 {
            return Err(Error::Domain("levels_per_transmon must be >= 2".into()));
        }
        if !(1..=2).contains(&self.transmons) {
            return Err(Error::Domain("transmons must be 1 or 2".into()));
        }
        Ok(())
    }
}

/// Lowering operator on `levels` oscillator levels.
pub fn lowering(levels: usize) -> ComplexMatrix {
    let mut b = ComplexMatrix::zeros(levels);
    for n in 1..levels {
        b.set(n - 1, n, (n as f64).sqrt().into());
    }
    b
}

/// Drift and control parts, `H(W) = drift + W * control`.
#[derive(Clone, Debug)]
pub struct ControlSystem {
    pub params: SystemParameters,
    pub drift: ComplexMatrix,
    pub control: ComplexMatrix,
}

impl ControlSystem {
    pub fn new(params: SystemParameters) -> Result<Self> {
        params.validate()?;
        let l = params.levels_per_transmon;
        let b = lowering(l);
        let id = ComplexMatrix::identity(l);
        let (b1, b2) = if params.transmons == 2 {
            (b.kron(&id), Some(id.kron(&b)))
        } else {
            (b, None)
        };
        let b1d = b1.adjoint();
        let mut drift = (&b1d * &b1).scale_real(params.detuning);
        if let Some(b2) = b2 {
            let hop = &(&b1d * &b2) + &(&b1 * &b2.adjoint());
            drift = &drift + &hop.scale_real(params.coupling);
        }
        let control = &b1d + &b1;
        Ok(Self {
            params,
            drift,
            control,
        })
    }

    pub fn dim(&self) -> usize {
        self.drift.dim()
    }

    pub fn max_drive(&self) -> f64 {
        self.params.max_drive
    }

    /// No range check; used where amplitudes are known to be in bounds.
    pub fn hamiltonian_unchecked(&self, drive: f64) -> ComplexMatrix {
        &self.drift + &self.control.scale_real(drive)
    }

    pub fn hamiltonian(&self, drive: f64) -> Result<ComplexMatrix> {
        check_drive(drive, self.params.max_drive)?;
        Ok(self.hamiltonian_unchecked(drive))
    }
}

pub(crate) fn check_drive(drive: f64, max: f64) -> Result<()> {
    // Relative slack for amplitudes produced by rescaling.
    let slack = 1e-12 * max;
    if !(drive.is_finite() && drive >= -slack && drive <= max + slack) {
        return Err(Error::Domain(format!("drive {drive:e} outside [0, {max:e}]")));
    }
    Ok(())
}

/// Hermitian matrix of the effective Hamiltonian at drive amplitude `drive`.
pub fn build_hamiltonian(params: &SystemParameters, drive: f64) -> Result<ComplexMatrix> {
    ControlSystem::new(*params)?.hamiltonian(drive)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn undriven_two_level_pair() {
        let p = SystemParameters::cross_resonance();
        let h = build_hamiltonian(&p, 0.0).unwrap();
        assert_eq!(h.dim(), 4);
        // basis |n1 n2>, index 2*n1 + n2
        let expected_diag = [0.0, 0.0, p.detuning, p.detuning];
        for (i, d) in expected_diag.iter().enumerate() {
            assert_eq!(h.get(i, i).re, *d);
        }
        assert_eq!(h.get(1, 2).re, p.coupling);
        assert_eq!(h.get(2, 1).re, p.coupling);
        for (r, c) in [(0, 2), (2, 0), (1, 3), (3, 1), (0, 1), (0, 3), (1, 0), (2, 3)] {
            assert_eq!(h.get(r, c).norm(), 0.0, "entry ({r},{c})");
        }
    }

    #[test]
    fn hermitian_for_any_drive() {
        let p = SystemParameters::cross_resonance();
        for k in 0..=10 {
            let h = build_hamiltonian(&p, p.max_drive * k as f64 / 10.0).unwrap();
            assert_eq!(h.hermiticity_error(), 0.0);
        }
    }

    #[test]
    fn drive_out_of_range_is_a_domain_error() {
        let p = SystemParameters::cross_resonance();
        assert!(matches!(build_hamiltonian(&p, -1.0e6), Err(Error::Domain(_))));
        assert!(matches!(build_hamiltonian(&p, 1.01 * p.max_drive), Err(Error::Domain(_))));
    }

    #[test]
    fn three_levels_give_nine_dimensions() {
        let p = SystemParameters {
            levels_per_transmon: 3,
            ..SystemParameters::cross_resonance()
        };
        let h = build_hamiltonian(&p, 0.5 * p.max_drive).unwrap();
        assert_eq!(h.dim(), 9);
        assert_eq!(h.hermiticity_error(), 0.0);
    }
}
