//! Stochastic descent over action sequences: single time-slice changes are
//! proposed in random order and kept only if they raise the fidelity. A
//! full pass over every possible change without improvement means the
//! sequence is a local optimum; it is recorded and the search restarts.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::env::ControlEnvironment;
use crate::error::Result;
use crate::record::{Pulse, Stage, Tracker};

#[derive(Clone, Debug)]
pub struct Descent {
    pub actions: Vec<usize>,
    pub fidelity: f64,
    pub converged: bool,
    pub proposals: u64,
}

/// One descent from `start`. `keep_going` is polled between proposals.
pub fn descend<R: Rng + ?Sized>(
    env: &dyn ControlEnvironment,
    start: Vec<usize>,
    rng: &mut R,
    mut keep_going: impl FnMut() -> bool,
) -> Result<Descent> {
    let a_count = env.action_count();
    let mut x = start;
    let mut f = env.evaluate(&x)?;
    let mut proposals = 0;
    let mut moves: Vec<(usize, usize)> = (0..x.len())
        .flat_map(|t| (1..a_count).map(move |shift| (t, shift)))
        .collect();
    'outer: loop {
        moves.shuffle(rng);
        for &(t, shift) in &moves {
            if !keep_going() {
                return Ok(Descent {
                    actions: x,
                    fidelity: f,
                    converged: false,
                    proposals,
                });
            }
            let old = x[t];
            x[t] = (old + shift) % a_count;
            proposals += 1;
            let candidate = env.evaluate(&x)?;
            if candidate > f {
                f = candidate;
                continue 'outer;
            }
            x[t] = old;
        }
        return Ok(Descent {
            actions: x,
            fidelity: f,
            converged: true,
            proposals,
        });
    }
}

/// Restarted descents until the budget is used; one record per descent.
pub fn stochastic_descent<R: Rng + ?Sized>(
    env: &dyn ControlEnvironment,
    tracker: &mut Tracker<'_>,
    rng: &mut R,
) -> Result<Vec<Descent>> {
    let mut out = Vec::new();
    let mut group = 0;
    while !tracker.exhausted() {
        let start: Vec<usize> = (0..env.horizon()).map(|_| rng.gen_range(0..env.action_count())).collect();
        let deadline_tracker = &*tracker;
        let d = descend(env, start, rng, || !deadline_tracker.deadline_passed())?;
        tracker.work(d.proposals + 1);
        let stage = if d.converged { Stage::Descent } else { Stage::Iterate };
        tracker.emit(stage, group, None, d.fidelity, Pulse::Actions(d.actions.clone()))?;
        group += 1;
        tracker.complete_unit();
        out.push(d);
    }
    Ok(out)
}
