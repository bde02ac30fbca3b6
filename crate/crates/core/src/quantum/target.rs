//! Target gates.

use std::f64::consts::FRAC_PI_4;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::matrix::{ComplexMatrix, UnitaryOperator};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TargetGate {
    /// `exp(-i pi/4 Z (x) X)` on a transmon pair.
    SqrtZx,
    /// Pauli X on a single transmon.
    X,
}

impl TargetGate {
    pub fn build(self, levels_per_transmon: usize, transmons: usize) -> Result<UnitaryOperator> {
        match (self, transmons) {
            (TargetGate::SqrtZx, 2) => build_target_sqrt_zx(levels_per_transmon),
            (TargetGate::X, 1) => build_target_x(levels_per_transmon),
            (gate, n) => Err(Error::InvalidInput(format!(
                "target {gate:?} is not defined for {n} transmon(s)"
            ))),
        }
    }
}

/// `cos(pi/4) I - i sin(pi/4) Z (x) X` on the two-qubit computational
/// subspace, identity on any leakage levels.
pub fn build_target_sqrt_zx(levels_per_transmon: usize) -> Result<UnitaryOperator> {
    if levels_per_transmon < 2 {
        return Err(Error::Domain("need at least two levels per transmon".into()));
    }
    let l = levels_per_transmon;
    let c = Complex64::new(FRAC_PI_4.cos(), 0.0);
    let s = Complex64::new(0.0, -FRAC_PI_4.sin());
    // Z (x) X on |q1 q2>: sign from q1, flips q2.
    let mut u = ComplexMatrix::identity(l * l);
    for q1 in 0..2 {
        let sign = if q1 == 0 { 1.0 } else { -1.0 };
        for q2 in 0..2 {
            let row = q1 * l + q2;
            u.set(row, row, c);
            let col = q1 * l + (1 - q2);
            u.set(row, col, s * sign);
        }
    }
    UnitaryOperator::new(u)
}

/// Pauli X on the lowest two levels of one transmon.
pub fn build_target_x(levels: usize) -> Result<UnitaryOperator> {
    if levels < 2 {
        return Err(Error::Domain("need at least two levels".into()));
    }
    let mut u = ComplexMatrix::identity(levels);
    u.set(0, 0, 0.0.into());
    u.set(1, 1, 0.0.into());
    u.set(0, 1, 1.0.into());
    u.set(1, 0, 1.0.into());
    UnitaryOperator::new(u)
}
