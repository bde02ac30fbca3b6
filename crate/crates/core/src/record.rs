//! Optimization records, budgets and clocks shared by every optimizer.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// What a record describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    /// Terminal sequence of one tree-search or Q-learning episode.
    Episode,
    /// Best member of a GA population after one generation.
    Generation,
    /// End point of one stochastic-descent run.
    Descent,
    /// Intermediate iterate (GRAPE iteration, unfinished descent).
    Iterate,
    /// Starting point handed to a local optimizer.
    Seed,
    /// Result of a local optimizer.
    Final,
}

impl Stage {
    /// Whether the record is a finished candidate solution.
    pub fn is_solution(self) -> bool {
        matches!(self, Stage::Episode | Stage::Generation | Stage::Descent | Stage::Final)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Episode => "episode",
            Stage::Generation => "generation",
            Stage::Descent => "descent",
            Stage::Iterate => "iterate",
            Stage::Seed => "seed",
            Stage::Final => "final",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Stage {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "episode" => Stage::Episode,
            "generation" => Stage::Generation,
            "descent" => Stage::Descent,
            "iterate" => Stage::Iterate,
            "seed" => Stage::Seed,
            "final" => Stage::Final,
            other => return Err(Error::InvalidInput(format!("unknown stage `{other}`"))),
        })
    }
}

/// A control sequence in whichever representation the optimizer works in.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "values", rename_all = "kebab-case")]
pub enum Pulse {
    Actions(Vec<usize>),
    Bits(Vec<u8>),
    /// Drive amplitudes in rad/s.
    Amplitudes(Vec<f64>),
}

impl Pulse {
    pub fn kind(&self) -> &'static str {
        match self {
            Pulse::Actions(_) => "actions",
            Pulse::Bits(_) => "bits",
            Pulse::Amplitudes(_) => "amplitudes",
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Pulse::Actions(v) => v.len(),
            Pulse::Bits(v) => v.len(),
            Pulse::Amplitudes(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Space-separated values; bits are written as one contiguous string.
    pub fn encode(&self) -> String {
        match self {
            Pulse::Actions(v) => v.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(" "),
            Pulse::Bits(v) => v.iter().map(|&b| if b == 0 { '0' } else { '1' }).collect(),
            Pulse::Amplitudes(v) => v.iter().map(|a| format!("{a:.16e}")).collect::<Vec<_>>().join(" "),
        }
    }

    pub fn decode(kind: &str, text: &str) -> Result<Self> {
        let bad = |e: &dyn fmt::Display| Error::InvalidInput(format!("bad {kind} pulse: {e}"));
        Ok(match kind {
            "actions" => Pulse::Actions(
                text.split_whitespace()
                    .map(|s| s.parse().map_err(|e| bad(&e)))
                    .collect::<Result<_>>()?,
            ),
            "bits" => Pulse::Bits(
                text.chars()
                    .map(|c| match c {
                        '0' => Ok(0),
                        '1' => Ok(1),
                        other => Err(bad(&other)),
                    })
                    .collect::<Result<_>>()?,
            ),
            "amplitudes" => Pulse::Amplitudes(
                text.split_whitespace()
                    .map(|s| s.parse().map_err(|e| bad(&e)))
                    .collect::<Result<_>>()?,
            ),
            other => return Err(Error::InvalidInput(format!("unknown pulse kind `{other}`"))),
        })
    }
}

/// One row of optimizer output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizationRecord {
    pub optimizer: String,
    /// Position in the run's record stream, from 0.
    pub index: u64,
    /// Episode, generation, descent or GRAPE-run number.
    pub group: u64,
    pub stage: Stage,
    /// Index of the record this one was derived from.
    pub parent: Option<u64>,
    /// Seconds under the wall clock, work units under the logical clock.
    pub elapsed: f64,
    pub fidelity: f64,
    pub pulse: Pulse,
    pub seed: u64,
    pub config_hash: String,
}

impl OptimizationRecord {
    pub fn infidelity(&self) -> f64 {
        (1.0 - self.fidelity).max(0.0)
    }
}

/// Receives records as they are produced.
pub trait RecordSink {
    fn emit(&mut self, record: OptimizationRecord) -> Result<()>;
}

impl RecordSink for Vec<OptimizationRecord> {
    fn emit(&mut self, record: OptimizationRecord) -> Result<()> {
        self.push(record);
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Budget {
    /// Units of the optimizer's outer loop: episodes, generations, descents
    /// or local-optimizer runs.
    Episodes(u64),
    Seconds(f64),
}

impl Budget {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Budget::Episodes(0) => Err(Error::Domain("episode budget must be positive".into())),
            Budget::Seconds(s) if !(s.is_finite() && s > 0.0) => {
                Err(Error::Domain(format!("time budget must be positive, got {s}")))
            }
            _ => Ok(()),
        }
    }

    /// Splits into two consecutive budgets, the first taking `fraction`.
    pub fn split(&self, fraction: f64) -> (Budget, Budget) {
        match *self {
            Budget::Episodes(n) => {
                let first = ((n as f64 * fraction).round() as u64).clamp(1, n.max(2) - 1);
                (Budget::Episodes(first), Budget::Episodes(n.saturating_sub(first).max(1)))
            }
            Budget::Seconds(s) => (Budget::Seconds(s * fraction), Budget::Seconds(s * (1.0 - fraction))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClockKind {
    Wall,
    /// Counts work units so that outputs do not depend on machine speed.
    Logical,
}

#[derive(Clone, Debug)]
pub struct Clock {
    kind: ClockKind,
    start: Instant,
    work: u64,
}

impl Clock {
    pub fn new(kind: ClockKind) -> Self {
        Self {
            kind,
            start: Instant::now(),
            work: 0,
        }
    }

    pub fn kind(&self) -> ClockKind {
        self.kind
    }

    /// Records `units` of work (propagation steps or gradient evaluations).
    pub fn work(&mut self, units: u64) {
        self.work += units;
    }

    pub fn elapsed(&self) -> f64 {
        match self.kind {
            ClockKind::Wall => self.start.elapsed().as_secs_f64(),
            ClockKind::Logical => self.work as f64,
        }
    }

    pub fn wall_seconds(&self) -> f64 {
        self.start.elapsed().as_secs_f64()
    }
}

/// Per-run bookkeeping: numbering, timestamps, provenance and the budget.
pub struct Tracker<'a> {
    sink: &'a mut dyn RecordSink,
    pub clock: Clock,
    budget: Budget,
    optimizer: String,
    seed: u64,
    config_hash: String,
    next_index: u64,
    units: u64,
    best: Option<OptimizationRecord>,
}

impl<'a> Tracker<'a> {
    pub fn new(
        sink: &'a mut dyn RecordSink,
        clock: ClockKind,
        budget: Budget,
        optimizer: impl Into<String>,
        seed: u64,
        config_hash: impl Into<String>,
    ) -> Result<Self> {
        budget.validate()?;
        Ok(Self {
            sink,
            clock: Clock::new(clock),
            budget,
            optimizer: optimizer.into(),
            seed,
            config_hash: config_hash.into(),
            next_index: 0,
            units: 0,
            best: None,
        })
    }

    pub fn budget(&self) -> Budget {
        self.budget
    }

    /// Replaces the budget, e.g. for the second stage of a split run.
    pub fn set_budget(&mut self, budget: Budget) {
        self.budget = budget;
        self.units = 0;
        if let Budget::Seconds(s) = budget {
            self.budget = Budget::Seconds(s + self.clock.wall_seconds());
        }
    }

    pub fn set_optimizer(&mut self, name: impl Into<String>) {
        self.optimizer = name.into();
    }

    /// Marks one outer-loop unit as done.
    pub fn complete_unit(&mut self) {
        self.units += 1;
    }

    pub fn units(&self) -> u64 {
        self.units
    }

    /// True once the budget is used up. Time budgets always use wall time.
    pub fn exhausted(&self) -> bool {
        match self.budget {
            Budget::Episodes(n) => self.units >= n,
            Budget::Seconds(s) => self.clock.wall_seconds() >= s,
        }
    }

    /// True once a time budget has run out; never for unit budgets.
    pub fn deadline_passed(&self) -> bool {
        matches!(self.budget, Budget::Seconds(s) if self.clock.wall_seconds() >= s)
    }

    pub fn work(&mut self, units: u64) {
        self.clock.work(units);
    }

    /// Emits a record and returns its index.
    pub fn emit(&mut self, stage: Stage, group: u64, parent: Option<u64>, fidelity: f64, pulse: Pulse) -> Result<u64> {
        let index = self.next_index;
        self.next_index += 1;
        let record = OptimizationRecord {
            optimizer: self.optimizer.clone(),
            index,
            group,
            stage,
            parent,
            elapsed: self.clock.elapsed(),
            fidelity,
            pulse,
            seed: self.seed,
            config_hash: self.config_hash.clone(),
        };
        if stage.is_solution() && self.best.as_ref().map_or(true, |b| fidelity > b.fidelity) {
            self.best = Some(record.clone());
        }
        self.sink.emit(record)?;
        Ok(index)
    }

    pub fn records_emitted(&self) -> u64 {
        self.next_index
    }

    /// Best solution record so far.
    pub fn best(&self) -> Option<&OptimizationRecord> {
        self.best.as_ref()
    }
}
