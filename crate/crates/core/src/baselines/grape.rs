//! Exact fidelity gradients for piecewise-constant and filtered pulses.
//!
//! The pulse is mapped linearly to substep drive samples (repetition for
//! plain steps, Gaussian convolution weights when filtered). For every
//! substep the propagator derivative comes from the eigendecomposition of
//! its Hamiltonian; forward products `R_m` and backward products
//! `B_m = T^dag U_{M-1} ... U_{m+1}` give
//! `dF/ds_m = 2 Re(conj(g) Tr(B_m dU_m R_m) / d)` with `g = Tr(T^dag U) / d`,
//! and the filter weights pull the sample gradient back onto the steps.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::fidelity::fidelity_unchecked;
use crate::quantum::hamiltonian::check_drive;
use crate::quantum::{ComplexMatrix, ControlSystem, FilterWeights, HermitianEigen, UnitaryOperator};

/// Optional Gaussian filter applied before propagation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterSpec {
    /// Seconds.
    pub sigma: f64,
}

#[derive(Clone, Debug)]
enum SampleMap {
    Repeat,
    Filter(FilterWeights),
}

/// Fidelity of a pulse of fixed length as a function of its amplitudes.
#[derive(Clone, Debug)]
pub struct GrapeProblem {
    system: ControlSystem,
    target: UnitaryOperator,
    steps: usize,
    step_duration: f64,
    resolution: usize,
    map: SampleMap,
}

impl GrapeProblem {
    pub fn new(
        system: ControlSystem,
        target: UnitaryOperator,
        steps: usize,
        step_duration: f64,
        resolution: usize,
        filter: Option<FilterSpec>,
    ) -> Result<Self> {
        if steps == 0 || resolution == 0 {
            return Err(Error::Domain("steps and resolution must be >= 1".into()));
        }
        if !(step_duration > 0.0) {
            return Err(Error::Domain("step duration must be positive".into()));
        }
        if target.dim() != system.dim() {
            return Err(Error::Dimension("target does not match the system".into()));
        }
        let map = match filter {
            None => SampleMap::Repeat,
            Some(f) => SampleMap::Filter(FilterWeights::new(steps, step_duration, f.sigma, resolution)?),
        };
        Ok(Self {
            system,
            target,
            steps,
            step_duration,
            resolution,
            map,
        })
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn step_duration(&self) -> f64 {
        self.step_duration
    }

    pub fn max_drive(&self) -> f64 {
        self.system.max_drive()
    }

    pub fn target(&self) -> &UnitaryOperator {
        &self.target
    }

    fn check(&self, amplitudes: &[f64]) -> Result<()> {
        if amplitudes.len() != self.steps {
            return Err(Error::Dimension(format!(
                "pulse has {} steps, problem has {}",
                amplitudes.len(),
                self.steps
            )));
        }
        for &a in amplitudes {
            check_drive(a, self.system.max_drive())?;
        }
        Ok(())
    }

    fn samples(&self, amplitudes: &[f64]) -> Vec<f64> {
        let max = self.system.max_drive();
        match &self.map {
            SampleMap::Repeat => amplitudes
                .iter()
                .flat_map(|&a| std::iter::repeat(a).take(self.resolution))
                .collect(),
            // The kernel has unit mass, so the clamp only removes rounding.
            SampleMap::Filter(w) => w.apply(amplitudes).into_iter().map(|s| s.clamp(0.0, max)).collect(),
        }
    }

    fn pull_back(&self, sample_grad: &[f64]) -> Vec<f64> {
        match &self.map {
            SampleMap::Repeat => sample_grad.chunks(self.resolution).map(|c| c.iter().sum()).collect(),
            SampleMap::Filter(w) => w.pull_back(sample_grad),
        }
    }

    fn dt(&self) -> f64 {
        self.step_duration / self.resolution as f64
    }

    pub fn unitary(&self, amplitudes: &[f64]) -> Result<UnitaryOperator> {
        self.check(amplitudes)?;
        let dt = self.dt();
        let mut u = ComplexMatrix::identity(self.system.dim());
        for s in self.samples(amplitudes) {
            u = &HermitianEigen::new(&self.system.hamiltonian_unchecked(s))?.propagator(dt) * &u;
        }
        UnitaryOperator::new(u)
    }

    pub fn fidelity(&self, amplitudes: &[f64]) -> Result<f64> {
        Ok(fidelity_unchecked(&self.unitary(amplitudes)?, &self.target))
    }

    /// Fidelity and its gradient with respect to each step amplitude (per
    /// rad/s).
    pub fn fidelity_and_gradient(&self, amplitudes: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.check(amplitudes)?;
        let dt = self.dt();
        let d = self.system.dim();
        let samples = self.samples(amplitudes);
        let eigs = samples
            .iter()
            .map(|&s| HermitianEigen::new(&self.system.hamiltonian_unchecked(s)))
            .collect::<Result<Vec<_>>>()?;
        let steps: Vec<ComplexMatrix> = eigs.iter().map(|e| e.propagator(dt)).collect();
        // forward[m] = U_{m-1} ... U_0
        let mut forward = Vec::with_capacity(steps.len() + 1);
        forward.push(ComplexMatrix::identity(d));
        for u in &steps {
            let next = u * forward.last().expect("non-empty");
            forward.push(next);
        }
        let total = forward.last().expect("non-empty");
        let t_dag = self.target.matrix().adjoint();
        let g = (&t_dag * total).trace() / d as f64;
        let fid = g.norm_sqr();
        let mut sample_grad = vec![0.0; steps.len()];
        let mut back = t_dag;
        for m in (0..steps.len()).rev() {
            let du = eigs[m].propagator_derivative(&self.system.control, dt);
            let tr = (&(&du * &forward[m]) * &back).trace() / d as f64;
            sample_grad[m] = 2.0 * (g.conj() * tr).re;
            back = &back * &steps[m];
        }
        Ok((fid, self.pull_back(&sample_grad)))
    }
}

/// Global phase that best aligns `u` with the target, for diagnostics.
pub fn overlap(u: &UnitaryOperator, target: &UnitaryOperator) -> Complex64 {
    (&target.matrix().adjoint() * u.matrix()).trace() / u.dim() as f64
}
