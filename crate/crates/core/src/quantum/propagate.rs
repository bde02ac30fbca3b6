use super::expm::propagator;
use super::hamiltonian::ControlSystem;
use super::matrix::{ComplexMatrix, UnitaryOperator};
use crate::error::{Error, Result};

/// Unitarity loss beyond which a propagation step is reported as a failure.
pub const PROPAGATION_TOL: f64 = 1e-8;

/// Returns `exp(-i H dt) U`.
pub fn propagate(u: &UnitaryOperator, h: &ComplexMatrix, dt: f64) -> Result<UnitaryOperator> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::Domain(format!("time step must be positive, got {dt:e}")));
    }
    if h.dim() != u.dim() {
        return Err(Error::Dimension(format!(
            "hamiltonian is {0}x{0}, state is {1}x{1}",
            h.dim(),
            u.dim()
        )));
    }
    let step = propagator(h, dt)?;
    let next = &step * u.matrix();
    let err = next.unitarity_error();
    if !(err < PROPAGATION_TOL) {
        return Err(Error::NumericalFailure(format!(
            "propagation lost unitarity (max |U^dagger U - I| = {err:.3e})"
        )));
    }
    Ok(UnitaryOperator::new_unchecked(next))
}

/// Evolution under piecewise-constant drive samples, each held for `dt`.
pub fn evolve_samples(system: &ControlSystem, samples: &[f64], dt: f64) -> Result<UnitaryOperator> {
    let mut u = UnitaryOperator::identity(system.dim());
    for &s in samples {
        u = propagate(&u, &system.hamiltonian(s)?, dt)?;
    }
    Ok(u)
}

/// Like [`evolve_samples`] but without the drive bound and with a single
/// unitarity check at the end. Used for table construction, where the
/// samples are generated internally.
pub(crate) fn evolve_samples_unchecked(system: &ControlSystem, samples: &[f64], dt: f64) -> Result<UnitaryOperator> {
    let mut u = ComplexMatrix::identity(system.dim());
    for &s in samples {
        u = &propagator(&system.hamiltonian_unchecked(s), dt)? * &u;
    }
    let err = u.unitarity_error();
    if !(err < PROPAGATION_TOL) {
        return Err(Error::NumericalFailure(format!(
            "propagation lost unitarity (max |U^dagger U - I| = {err:.3e})"
        )));
    }
    Ok(UnitaryOperator::new_unchecked(u))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::hamiltonian::SystemParameters;

    #[test]
    fn zero_hamiltonian_leaves_state_alone() {
        let u = UnitaryOperator::identity(4);
        let out = propagate(&u, &ComplexMatrix::zeros(4), 1e-9).unwrap();
        assert!(out.matrix().max_abs_diff(u.matrix()) < 1e-15);
    }

    #[test]
    fn constant_hamiltonian_composes() {
        let sys = ControlSystem::new(SystemParameters::cross_resonance()).unwrap();
        let h = &sys.drift;
        let id = UnitaryOperator::identity(4);
        let twice = propagate(&propagate(&id, h, 2e-9).unwrap(), h, 2e-9).unwrap();
        let once = propagate(&id, h, 4e-9).unwrap();
        assert!(twice.matrix().max_abs_diff(once.matrix()) < 1e-10);
    }

    #[test]
    fn rejects_non_positive_step() {
        let u = UnitaryOperator::identity(2);
        assert!(matches!(propagate(&u, &ComplexMatrix::zeros(2), 0.0), Err(Error::Domain(_))));
    }
}
