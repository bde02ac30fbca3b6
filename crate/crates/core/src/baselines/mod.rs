//! Comparison optimizers: genetic algorithm, tabular Q-learning, stochastic
//! descent, GRAPE, and the tree-search to GRAPE hybrid.

mod ga;
mod grape;
mod lbfgs;
mod optimize;
mod qlearning;
mod sd;

pub use ga::{crossover, ga_optimize, mutate, roulette, GaConfig, GaOutcome};
pub use grape::{overlap, FilterSpec, GrapeProblem};
pub use lbfgs::{minimize_box, LbfgsResult, LbfgsSettings, LbfgsStop};
pub use optimize::{
    grape_optimize, grape_random_restarts, hybrid_optimize, GrapeConfig, GrapeOutcome, HybridConfig, HybridOutcome,
};
pub use qlearning::{q_learning_optimize, QLearningConfig, QLearningOutcome, QTable};
pub use sd::{descend, stochastic_descent, Descent};
