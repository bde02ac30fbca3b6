//! Tabular Q-learning with state `(step, last action)`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::ControlEnvironment;
use crate::error::{Error, Result};
use crate::record::{Budget, Pulse, Stage, Tracker};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QLearningConfig {
    pub learning_rate: f64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    /// Entries start uniform in `[0, init_scale)`.
    pub init_scale: f64,
}

impl Default for QLearningConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.001,
            epsilon_start: 1.0,
            epsilon_end: 0.0,
            init_scale: 1e-3,
        }
    }
}

/// Values for every `(step, last action or none, action)`.
#[derive(Clone, Debug, PartialEq)]
pub struct QTable {
    horizon: usize,
    actions: usize,
    values: Vec<f64>,
}

impl QTable {
    pub fn new<R: Rng + ?Sized>(horizon: usize, actions: usize, init_scale: f64, rng: &mut R) -> Self {
        let n = horizon * (actions + 1) * actions;
        let values = (0..n)
            .map(|_| if init_scale > 0.0 { rng.gen::<f64>() * init_scale } else { 0.0 })
            .collect();
        Self {
            horizon,
            actions,
            values,
        }
    }

    fn offset(&self, step: usize, last: Option<usize>) -> usize {
        (step * (self.actions + 1) + last.unwrap_or(self.actions)) * self.actions
    }

    pub fn row(&self, step: usize, last: Option<usize>) -> &[f64] {
        let o = self.offset(step, last);
        &self.values[o..o + self.actions]
    }

    pub fn get(&self, step: usize, last: Option<usize>, action: usize) -> f64 {
        self.values[self.offset(step, last) + action]
    }

    /// `Q <- Q + alpha (r + max Q(next) - Q)`; `next` is `None` at the horizon.
    pub fn update(&mut self, step: usize, last: Option<usize>, action: usize, reward: f64, alpha: f64) {
        let next = if step + 1 < self.horizon {
            self.row(step + 1, Some(action)).iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        } else {
            0.0
        };
        let o = self.offset(step, last) + action;
        self.values[o] += alpha * (reward + next - self.values[o]);
    }

    /// Greedy action, ties to the lowest index.
    pub fn greedy(&self, step: usize, last: Option<usize>) -> usize {
        let row = self.row(step, last);
        (0..row.len()).fold(0, |b, a| if row[a] > row[b] { a } else { b })
    }

    pub fn greedy_sequence(&self) -> Vec<usize> {
        let mut last = None;
        (0..self.horizon)
            .map(|t| {
                let a = self.greedy(t, last);
                last = Some(a);
                a
            })
            .collect()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

pub struct QLearningOutcome {
    pub table: QTable,
    pub episodes: u64,
}

fn epsilon(config: &QLearningConfig, tracker: &Tracker<'_>, budget: Budget) -> f64 {
    let progress = match budget {
        Budget::Episodes(n) if n > 1 => tracker.units() as f64 / (n - 1) as f64,
        Budget::Episodes(_) => 1.0,
        Budget::Seconds(s) => tracker.clock.wall_seconds() / s,
    };
    let p = progress.clamp(0.0, 1.0);
    config.epsilon_start + (config.epsilon_end - config.epsilon_start) * p
}

/// Runs epsilon-greedy episodes until the budget is used.
pub fn q_learning_optimize<R: Rng + ?Sized>(
    env: &dyn ControlEnvironment,
    config: &QLearningConfig,
    tracker: &mut Tracker<'_>,
    rng: &mut R,
) -> Result<QLearningOutcome> {
    if !(config.learning_rate >= 0.0 && config.init_scale >= 0.0) {
        return Err(Error::Domain("learning_rate and init_scale must be >= 0".into()));
    }
    let mut table = QTable::new(env.horizon(), env.action_count(), config.init_scale, rng);
    let budget = tracker.budget();
    let mut episodes = 0;
    while !tracker.exhausted() {
        let eps = epsilon(config, tracker, budget);
        let mut state = env.initial_state();
        let mut actions = Vec::with_capacity(env.horizon());
        while !env.is_terminal(&state) {
            let t = state.step;
            let last = state.last_action;
            let a = if rng.gen::<f64>() < eps {
                rng.gen_range(0..env.action_count())
            } else {
                table.greedy(t, last)
            };
            state = env.transition(&state, a)?;
            let r = env.reward(&state);
            table.update(t, last, a, r, config.learning_rate);
            actions.push(a);
        }
        tracker.work(actions.len() as u64);
        let fidelity = env.reward(&state);
        tracker.emit(Stage::Episode, episodes, None, fidelity, Pulse::Actions(actions))?;
        episodes += 1;
        tracker.complete_unit();
    }
    Ok(QLearningOutcome { table, episodes })
}
