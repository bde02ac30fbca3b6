//! GRAPE ascent runs, the random-restart GRAPE baseline and the tree-search
//! to GRAPE hybrid.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::grape::GrapeProblem;
use super::lbfgs::{minimize_box, LbfgsSettings, LbfgsStop};
use crate::alphazero::{AlphaZero, AlphaZeroConfig, StopReason};
use crate::env::ControlEnvironment;
use crate::error::{Error, Result};
use crate::record::{Pulse, Stage, Tracker};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GrapeConfig {
    pub memory: usize,
    pub gradient_tolerance: f64,
    pub relative_tolerance: f64,
    pub max_iterations: usize,
    /// Emit a record for every accepted iterate, not only seed and result.
    pub record_iterates: bool,
}

impl Default for GrapeConfig {
    fn default() -> Self {
        let l = LbfgsSettings::default();
        Self {
            memory: l.memory,
            gradient_tolerance: l.gradient_tolerance,
            relative_tolerance: l.relative_tolerance,
            max_iterations: l.max_iterations,
            record_iterates: true,
        }
    }
}

impl GrapeConfig {
    pub fn lbfgs(&self) -> LbfgsSettings {
        LbfgsSettings {
            memory: self.memory,
            gradient_tolerance: self.gradient_tolerance,
            relative_tolerance: self.relative_tolerance,
            max_iterations: self.max_iterations,
        }
    }
}

#[derive(Clone, Debug)]
pub struct GrapeOutcome {
    /// Rad/s.
    pub amplitudes: Vec<f64>,
    pub seed_fidelity: f64,
    pub fidelity: f64,
    pub iterations: usize,
    pub stop: LbfgsStop,
    /// Set when the line search failed and the best iterate was returned.
    pub degraded: bool,
    /// Fidelity after every accepted iterate, starting with the seed.
    pub history: Vec<f64>,
    pub seed_record: u64,
    pub final_record: u64,
}

/// Bound-constrained quasi-Newton ascent of the fidelity from `seed`
/// (rad/s). Works in units of the drive bound, so the gradient tolerance
/// applies to `dF/d(Omega / Omega_max)`.
pub fn grape_optimize(
    problem: &GrapeProblem,
    seed: &[f64],
    config: &GrapeConfig,
    tracker: &mut Tracker<'_>,
    group: u64,
    parent: Option<u64>,
) -> Result<GrapeOutcome> {
    let max = problem.max_drive();
    let seed_fidelity = problem.fidelity(seed)?;
    let seed_record = tracker.emit(Stage::Seed, group, parent, seed_fidelity, Pulse::Amplitudes(seed.to_vec()))?;
    let mut history = vec![seed_fidelity];
    let x0: Vec<f64> = seed.iter().map(|a| a / max).collect();
    let to_drive = |x: &[f64]| -> Vec<f64> { x.iter().map(|u| (u * max).clamp(0.0, max)).collect() };
    let mut evaluations = 0u64;
    let result = {
        let history = &mut history;
        let tracker_cell = std::cell::RefCell::new(&mut *tracker);
        minimize_box(
            x0,
            0.0,
            1.0,
            &config.lbfgs(),
            |x| {
                evaluations += 1;
                let (f, g) = problem.fidelity_and_gradient(&to_drive(x))?;
                Ok((-f, g.into_iter().map(|d| -d * max).collect()))
            },
            |_, x, f| {
                history.push(-f);
                let mut t = tracker_cell.borrow_mut();
                if config.record_iterates {
                    t.emit(Stage::Iterate, group, Some(seed_record), -f, Pulse::Amplitudes(to_drive(x)))?;
                }
                Ok(!t.deadline_passed())
            },
        )?
    };
    tracker.work(evaluations);
    let amplitudes = to_drive(&result.x);
    let fidelity = -result.f;
    let degraded = result.stop == LbfgsStop::LineSearchFailure;
    if degraded {
        log::warn!("GRAPE line search failed after {} iterations; keeping best iterate", result.iterations);
    }
    let final_record = tracker.emit(Stage::Final, group, Some(seed_record), fidelity, Pulse::Amplitudes(amplitudes.clone()))?;
    Ok(GrapeOutcome {
        amplitudes,
        seed_fidelity,
        fidelity,
        iterations: result.iterations,
        stop: result.stop,
        degraded,
        history,
        seed_record,
        final_record,
    })
}

/// GRAPE from uniformly random seeds until the budget is used.
pub fn grape_random_restarts<R: Rng + ?Sized>(
    problem: &GrapeProblem,
    config: &GrapeConfig,
    tracker: &mut Tracker<'_>,
    rng: &mut R,
) -> Result<Vec<GrapeOutcome>> {
    let mut out = Vec::new();
    let mut group = 0;
    while !tracker.exhausted() {
        let seed: Vec<f64> = (0..problem.steps()).map(|_| rng.gen::<f64>() * problem.max_drive()).collect();
        out.push(grape_optimize(problem, &seed, config, tracker, group, None)?);
        group += 1;
        tracker.complete_unit();
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HybridConfig {
    /// Share of the budget given to the tree search.
    pub search_fraction: f64,
}

impl Default for HybridConfig {
    fn default() -> Self {
        Self { search_fraction: 0.5 }
    }
}

pub struct HybridOutcome {
    pub search_stop: StopReason,
    pub refinements: Vec<(u64, GrapeOutcome)>,
}

/// Tree search on the discrete task, then GRAPE on its solutions, best
/// first. Every refinement's seed record points at the episode it came from.
pub fn hybrid_optimize(
    env: &dyn ControlEnvironment,
    problem: &GrapeProblem,
    search: &AlphaZeroConfig,
    grape: &GrapeConfig,
    hybrid: &HybridConfig,
    tracker: &mut Tracker<'_>,
    seed: u64,
) -> Result<HybridOutcome> {
    let levels = env
        .amplitude_levels()
        .ok_or_else(|| Error::InvalidInput("hybrid needs an environment with amplitude actions".into()))?
        .to_vec();
    if env.horizon() != problem.steps() {
        return Err(Error::Dimension("environment horizon and GRAPE problem length differ".into()));
    }
    if !(hybrid.search_fraction > 0.0 && hybrid.search_fraction < 1.0) {
        return Err(Error::Domain("search_fraction must lie strictly between 0 and 1".into()));
    }
    let (first, second) = tracker.budget().split(hybrid.search_fraction);
    tracker.set_budget(first);
    let run = AlphaZero::new(env, search.clone(), seed)?.run(tracker)?;
    tracker.set_budget(second);
    let mut solutions = run.solutions;
    solutions.sort_by(|a, b| b.fidelity.total_cmp(&a.fidelity).then(a.episode.cmp(&b.episode)));
    let mut refinements = Vec::new();
    for (group, sol) in solutions.iter().enumerate() {
        if tracker.exhausted() {
            break;
        }
        let pulse: Vec<f64> = sol.actions.iter().map(|&a| levels[a]).collect();
        let out = grape_optimize(problem, &pulse, grape, tracker, group as u64, Some(sol.record_index))?;
        refinements.push((sol.episode, out));
        tracker.complete_unit();
    }
    Ok(HybridOutcome {
        search_stop: run.stop,
        refinements,
    })
}
