use std::collections::VecDeque;

use rand::Rng;

use super::network::Example;
use crate::error::{Error, Result};
use crate::quantum::UnitaryOperator;

/// Network input for a state: real parts, imaginary parts (row-major) and
/// `step / horizon`.
pub fn encode_state(unitary: &UnitaryOperator, step: usize, horizon: usize) -> Vec<f64> {
    let m = unitary.matrix();
    let d = m.dim();
    let mut out = Vec::with_capacity(2 * d * d + 1);
    for r in 0..d {
        for c in 0..d {
            out.push(m.get(r, c).re);
        }
    }
    for r in 0..d {
        for c in 0..d {
            out.push(m.get(r, c).im);
        }
    }
    out.push(step as f64 / horizon.max(1) as f64);
    out
}

pub fn encoding_len(dim: usize) -> usize {
    2 * dim * dim + 1
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReplayRecord {
    pub encoding: Vec<f64>,
    pub policy: Vec<f64>,
    pub outcome: f64,
}

impl ReplayRecord {
    pub fn new(encoding: Vec<f64>, policy: Vec<f64>, outcome: f64) -> Result<Self> {
        let sum: f64 = policy.iter().sum();
        if (sum - 1.0).abs() > 1e-9 || policy.iter().any(|&p| !(p >= 0.0)) {
            return Err(Error::InvalidInput(format!("search policy is not a distribution (sum {sum})")));
        }
        if !(0.0..=1.0).contains(&outcome) {
            return Err(Error::InvalidInput(format!("outcome {outcome} outside [0, 1]")));
        }
        Ok(Self {
            encoding,
            policy,
            outcome,
        })
    }

    pub fn example(&self) -> Example<'_> {
        Example {
            encoding: &self.encoding,
            policy: &self.policy,
            outcome: self.outcome,
        }
    }
}

/// Bounded FIFO of training records.
#[derive(Clone, Debug)]
pub struct ReplayBuffer {
    capacity: usize,
    records: VecDeque<ReplayRecord>,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity: capacity.max(1),
            records: VecDeque::with_capacity(capacity.min(1 << 16)),
        }
    }

    pub fn push(&mut self, record: ReplayRecord) {
        if self.records.len() == self.capacity {
            self.records.pop_front();
        }
        self.records.push_back(record);
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn iter(&self) -> impl Iterator<Item = &ReplayRecord> {
        self.records.iter()
    }

    /// `size` records drawn uniformly with replacement.
    pub fn sample<R: Rng + ?Sized>(&self, size: usize, rng: &mut R) -> Vec<&ReplayRecord> {
        if self.records.is_empty() {
            return Vec::new();
        }
        (0..size)
            .map(|_| &self.records[rng.gen_range(0..self.records.len())])
            .collect()
    }
}
