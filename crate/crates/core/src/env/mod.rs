//! Episodic control tasks.
//!
//! Every task exposes a fixed set of discrete actions whose unitaries are
//! computed once up front. An episode starts from the identity, each step
//! multiplies one precomputed unitary onto the left of the accumulated
//! operator, and the only non-zero reward is the fidelity at the horizon.

pub mod cache;
mod digital;
mod filtered;
mod pwc;
mod sfq;

use std::sync::Arc;

pub use digital::{digital_environment, DigitalConfig};
pub use filtered::{filtered_environment, filtered_pair_table, FilteredConfig, FilteredEnv, FilteredTables};
pub use pwc::{amplitude_grid, pwc_environment, PwcConfig};
pub use sfq::{
    sfq_base_unitaries, sfq_environment, sfq_macro_actions, SfqBitObjective, SfqConfig, SfqMacroActions,
};

use crate::error::{Error, Result};
use crate::quantum::fidelity::fidelity_unchecked;
use crate::quantum::UnitaryOperator;

/// Position in an episode.
#[derive(Clone, Debug, PartialEq)]
pub struct EnvState {
    pub unitary: UnitaryOperator,
    pub step: usize,
    pub last_action: Option<usize>,
}

pub trait ControlEnvironment: Send + Sync {
    fn name(&self) -> &str;
    fn action_count(&self) -> usize;
    fn horizon(&self) -> usize;
    fn target(&self) -> &UnitaryOperator;

    /// Unitary applied when `action` follows `state`. The state is not yet
    /// terminal and `action` is in range.
    fn step_unitary(&self, state: &EnvState, action: usize) -> &UnitaryOperator;

    /// Drive amplitude (rad/s) represented by each action, when actions are
    /// analog amplitude levels.
    fn amplitude_levels(&self) -> Option<&[f64]> {
        None
    }

    /// Duration of one decision step in seconds.
    fn step_duration(&self) -> f64;

    fn dim(&self) -> usize {
        self.target().dim()
    }

    fn initial_state(&self) -> EnvState {
        EnvState {
            unitary: UnitaryOperator::identity(self.dim()),
            step: 0,
            last_action: None,
        }
    }

    fn is_terminal(&self, state: &EnvState) -> bool {
        state.step >= self.horizon()
    }

    fn transition(&self, state: &EnvState, action: usize) -> Result<EnvState> {
        if self.is_terminal(state) {
            return Err(Error::EpisodeComplete(state.step));
        }
        if action >= self.action_count() {
            return Err(Error::InvalidInput(format!(
                "action {action} out of range 0..{}",
                self.action_count()
            )));
        }
        let u = self.step_unitary(state, action);
        Ok(EnvState {
            unitary: state.unitary.then(u),
            step: state.step + 1,
            last_action: Some(action),
        })
    }

    /// Fidelity of the accumulated operator at the horizon, zero before it.
    fn reward(&self, state: &EnvState) -> f64 {
        if self.is_terminal(state) {
            fidelity_unchecked(&state.unitary, self.target())
        } else {
            0.0
        }
    }

    /// Terminal fidelity of a complete action sequence.
    fn evaluate(&self, actions: &[usize]) -> Result<f64> {
        if actions.len() != self.horizon() {
            return Err(Error::InvalidInput(format!(
                "sequence has {} actions, horizon is {}",
                actions.len(),
                self.horizon()
            )));
        }
        let mut state = self.initial_state();
        for &a in actions {
            state = self.transition(&state, a)?;
        }
        Ok(self.reward(&state))
    }
}

pub type SharedEnv = Arc<dyn ControlEnvironment>;

/// Fitness of a fixed-length bit string, for bit-level optimizers.
pub trait BitObjective: Send + Sync {
    fn bit_count(&self) -> usize;
    fn fitness(&self, bits: &[u8]) -> f64;
}

/// Views a two-action environment as a bit objective, one bit per step.
pub struct EnvBits(pub SharedEnv);

impl EnvBits {
    pub fn new(env: SharedEnv) -> Result<Self> {
        if env.action_count() != 2 {
            return Err(Error::InvalidInput(format!(
                "bit view needs exactly two actions, environment has {}",
                env.action_count()
            )));
        }
        Ok(Self(env))
    }
}

impl BitObjective for EnvBits {
    fn bit_count(&self) -> usize {
        self.0.horizon()
    }

    fn fitness(&self, bits: &[u8]) -> f64 {
        let actions: Vec<usize> = bits.iter().map(|&b| usize::from(b != 0)).collect();
        self.0.evaluate(&actions).unwrap_or(0.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepOutcome {
    pub reward: f64,
    pub done: bool,
}

/// Stateful reset/step wrapper around an environment.
pub struct Episode<'a> {
    env: &'a dyn ControlEnvironment,
    state: EnvState,
    actions: Vec<usize>,
}

impl<'a> Episode<'a> {
    pub fn new(env: &'a dyn ControlEnvironment) -> Self {
        Self {
            env,
            state: env.initial_state(),
            actions: Vec::with_capacity(env.horizon()),
        }
    }

    pub fn reset(&mut self) -> &EnvState {
        self.state = self.env.initial_state();
        self.actions.clear();
        &self.state
    }

    pub fn step(&mut self, action: usize) -> Result<StepOutcome> {
        self.state = self.env.transition(&self.state, action)?;
        self.actions.push(action);
        Ok(StepOutcome {
            reward: self.env.reward(&self.state),
            done: self.env.is_terminal(&self.state),
        })
    }

    pub fn state(&self) -> &EnvState {
        &self.state
    }

    pub fn actions(&self) -> &[usize] {
        &self.actions
    }
}

/// Task whose actions map to fixed unitaries independent of history.
pub struct UnitaryTableEnv {
    name: String,
    actions: Vec<UnitaryOperator>,
    horizon: usize,
    target: UnitaryOperator,
    step_duration: f64,
    amplitudes: Option<Vec<f64>>,
}

impl UnitaryTableEnv {
    pub fn new(
        name: impl Into<String>,
        actions: Vec<UnitaryOperator>,
        horizon: usize,
        target: UnitaryOperator,
        step_duration: f64,
    ) -> Result<Self> {
        if actions.is_empty() {
            return Err(Error::InvalidInput("environment needs at least one action".into()));
        }
        if horizon == 0 {
            return Err(Error::InvalidInput("horizon must be >= 1".into()));
        }
        if let Some(u) = actions.iter().find(|u| u.dim() != target.dim()) {
            return Err(Error::Dimension(format!(
                "action unitary is {0}x{0}, target is {1}x{1}",
                u.dim(),
                target.dim()
            )));
        }
        Ok(Self {
            name: name.into(),
            actions,
            horizon,
            target,
            step_duration,
            amplitudes: None,
        })
    }

    pub fn with_amplitudes(mut self, amplitudes: Vec<f64>) -> Self {
        self.amplitudes = Some(amplitudes);
        self
    }

    pub fn action_unitaries(&self) -> &[UnitaryOperator] {
        &self.actions
    }
}

impl ControlEnvironment for UnitaryTableEnv {
    fn name(&self) -> &str {
        &self.name
    }

    fn action_count(&self) -> usize {
        self.actions.len()
    }

    fn horizon(&self) -> usize {
        self.horizon
    }

    fn target(&self) -> &UnitaryOperator {
        &self.target
    }

    fn step_unitary(&self, _state: &EnvState, action: usize) -> &UnitaryOperator {
        &self.actions[action]
    }

    fn amplitude_levels(&self) -> Option<&[f64]> {
        self.amplitudes.as_deref()
    }

    fn step_duration(&self) -> f64 {
        self.step_duration
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{build_target_sqrt_zx, fidelity};

    fn stub(horizon: usize) -> UnitaryTableEnv {
        let target = build_target_sqrt_zx(2).unwrap();
        let actions = vec![UnitaryOperator::identity(4); 3];
        UnitaryTableEnv::new("stub", actions, horizon, target, 1.0).unwrap()
    }

    #[test]
    fn identity_actions_end_at_identity_fidelity() {
        let env = stub(4);
        let mut ep = Episode::new(&env);
        for k in 0..4 {
            let out = ep.step(k % 3).unwrap();
            if k < 3 {
                assert_eq!(out.reward, 0.0);
                assert!(!out.done);
            } else {
                assert!(out.done);
                let expected = fidelity(&UnitaryOperator::identity(4), env.target()).unwrap();
                assert_eq!(out.reward, expected);
            }
        }
    }

    #[test]
    fn stepping_past_the_horizon_fails() {
        let env = stub(1);
        let mut ep = Episode::new(&env);
        ep.step(0).unwrap();
        assert!(matches!(ep.step(0), Err(Error::EpisodeComplete(1))));
        ep.reset();
        assert_eq!(ep.state().step, 0);
        assert!(ep.step(0).is_ok());
    }

    #[test]
    fn out_of_range_action() {
        let env = stub(2);
        assert!(matches!(
            env.transition(&env.initial_state(), 3),
            Err(Error::InvalidInput(_))
        ));
    }
}
