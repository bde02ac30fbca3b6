//! Tree search guided by the policy/value network, with pruning of fully
//! explored branches so that every episode yields a new action sequence.

mod driver;
mod exhaust;
mod search;
mod tree;

pub use driver::{AlphaZero, AlphaZeroConfig, AlphaZeroRun, NetworkSettings, Solution, StopReason};
pub use exhaust::ExhaustionTrie;
pub use search::{run_episode, EpisodeResult, Evaluator, SearchConfig, UniformEvaluator};
pub use tree::{add_root_noise, backup, dirichlet, root_policy, select_child, Edge, Node};
