//! Optimizers for quantum gate control: tree search guided by a
//! policy/value network, together with genetic, tabular, greedy and
//! gradient baselines, the environments they act on, and the experiment
//! harness that runs them reproducibly.

pub mod alphazero;
pub mod analysis;
pub mod baselines;
pub mod env;
pub mod error;
pub mod harness;
pub mod neural;
pub mod quantum;
pub mod record;
pub mod seed;

pub use error::{Error, Result};
