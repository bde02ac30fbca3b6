//! One self-play episode: repeated tree searches from the current root,
//! an action drawn from the visit-count policy, and reuse of the chosen
//! subtree as the next root.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::exhaust::ExhaustionTrie;
use super::tree::{add_root_noise, root_policy, select_child, Node};
use crate::env::ControlEnvironment;
use crate::error::{Error, Result};
use crate::neural::{encode_state, Network};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SearchConfig {
    pub c_puct: f64,
    pub simulations: usize,
    pub tau0: f64,
    /// Per-episode hyperbolic annealing rate.
    pub tau_rate: f64,
    /// Temperature below which moves are chosen greedily.
    pub deterministic_threshold: f64,
    pub dirichlet_alpha: f64,
    pub noise_epsilon: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            c_puct: 1.0,
            simulations: 100,
            tau0: 1.0,
            tau_rate: 0.001,
            deterministic_threshold: 0.9,
            dirichlet_alpha: 0.03,
            noise_epsilon: 0.25,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("c_puct", self.c_puct),
            ("tau0", self.tau0),
            ("dirichlet_alpha", self.dirichlet_alpha),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Domain(format!("{name} must be positive, got {v}")));
            }
        }
        if self.simulations == 0 {
            return Err(Error::Domain("simulations must be >= 1".into()));
        }
        if !(self.tau_rate >= 0.0 && self.deterministic_threshold >= 0.0) {
            return Err(Error::Domain("tau_rate and deterministic_threshold must be >= 0".into()));
        }
        if !(0.0..=1.0).contains(&self.noise_epsilon) {
            return Err(Error::Domain("noise_epsilon must lie in [0, 1]".into()));
        }
        Ok(())
    }

    /// Temperature after `episodes` completed episodes.
    pub fn temperature(&self, episodes: u64) -> f64 {
        self.tau0 / (1.0 + self.tau_rate * episodes as f64)
    }
}

/// Supplies priors and values for leaf states.
pub trait Evaluator {
    /// Per-action outputs (not necessarily normalized) and a value.
    fn evaluate(&self, encoding: &[f64]) -> Result<(Vec<f64>, f64)>;
}

impl Evaluator for Network {
    fn evaluate(&self, encoding: &[f64]) -> Result<(Vec<f64>, f64)> {
        self.predict(encoding)
    }
}

/// Equal priors and zero value; turns the search into plain UCT-style
/// enumeration.
pub struct UniformEvaluator(pub usize);

impl Evaluator for UniformEvaluator {
    fn evaluate(&self, _encoding: &[f64]) -> Result<(Vec<f64>, f64)> {
        Ok((vec![1.0; self.0], 0.0))
    }
}

#[derive(Clone, Debug)]
pub struct EpisodeResult {
    pub actions: Vec<usize>,
    pub fidelity: f64,
    /// Root encodings and the policies the moves were drawn from.
    pub encodings: Vec<Vec<f64>>,
    pub policies: Vec<Vec<f64>>,
    pub simulations: u64,
    /// `(sum of root child visits, root visits)` checked at every move.
    pub root_visit_log: Vec<(u64, u64)>,
}

struct Search<'a> {
    env: &'a dyn ControlEnvironment,
    evaluator: &'a dyn Evaluator,
    config: &'a SearchConfig,
    trie: &'a ExhaustionTrie,
    nodes: Vec<Node>,
}

impl Search<'_> {
    fn encode(&self, id: usize) -> Vec<f64> {
        let s = &self.nodes[id].state;
        encode_state(&s.unitary, s.step, self.env.horizon())
    }

    /// Expands a fresh node and returns its value.
    fn expand(&mut self, id: usize) -> Result<f64> {
        self.nodes[id].visits += 1;
        if self.nodes[id].terminal {
            let node = &mut self.nodes[id];
            let v = *node.terminal_value.get_or_insert_with(|| self.env.reward(&node.state));
            return Ok(v);
        }
        let (priors, value) = self.evaluator.evaluate(&self.encode(id))?;
        self.nodes[id].install_priors(&priors)?;
        Ok(value)
    }

    fn child(&mut self, id: usize, action: usize) -> Result<usize> {
        if let Some(c) = self.nodes[id].children[action] {
            return Ok(c);
        }
        let parent = &self.nodes[id];
        let state = self.env.transition(&parent.state, action)?;
        let terminal = self.env.is_terminal(&state);
        let mut node = Node::new(state, self.env.action_count(), terminal);
        node.trie = parent.trie.and_then(|t| self.trie.child(t, action));
        let cid = self.nodes.len();
        self.nodes.push(node);
        self.nodes[id].children[action] = Some(cid);
        Ok(cid)
    }

    fn simulate(&mut self, root: usize) -> Result<()> {
        let mut id = root;
        let mut path = Vec::new();
        let value = loop {
            let node = &self.nodes[id];
            if node.terminal || !node.expanded {
                if node.terminal && node.terminal_value.is_some() {
                    self.nodes[id].visits += 1;
                    break self.nodes[id].terminal_value.unwrap();
                }
                break self.expand(id)?;
            }
            let trie = self.trie;
            let trie_node = node.trie;
            let a = select_child(&node.edges, self.config.c_puct, |a| !trie.child_exhausted(trie_node, a))?;
            self.nodes[id].visits += 1;
            path.push((id, a));
            id = self.child(id, a)?;
        };
        for (n, a) in path {
            self.nodes[n].edges[a].record(value);
        }
        Ok(())
    }
}

fn sample<R: Rng + ?Sized>(pi: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last = 0;
    for (a, &p) in pi.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last = a;
            if u < acc {
                return a;
            }
        }
    }
    last
}

/// Runs one episode at temperature `tau` and marks its sequence in `trie`.
pub fn run_episode<R: Rng + ?Sized>(
    env: &dyn ControlEnvironment,
    evaluator: &dyn Evaluator,
    config: &SearchConfig,
    trie: &mut ExhaustionTrie,
    tau: f64,
    rng: &mut R,
) -> Result<EpisodeResult> {
    if trie.root_exhausted() {
        return Err(Error::SearchSpaceExhausted {
            episodes: trie.terminals(),
        });
    }
    let deterministic = tau < config.deterministic_threshold;
    let mut search = Search {
        env,
        evaluator,
        config,
        trie,
        nodes: Vec::new(),
    };
    let mut root_node = Node::new(env.initial_state(), env.action_count(), env.is_terminal(&env.initial_state()));
    root_node.trie = Some(ExhaustionTrie::ROOT);
    search.nodes.push(root_node);
    let mut root = 0;
    let mut result = EpisodeResult {
        actions: Vec::with_capacity(env.horizon()),
        fidelity: 0.0,
        encodings: Vec::with_capacity(env.horizon()),
        policies: Vec::with_capacity(env.horizon()),
        simulations: 0,
        root_visit_log: Vec::with_capacity(env.horizon()),
    };
    while !search.nodes[root].terminal {
        if !search.nodes[root].expanded {
            search.expand(root)?;
        }
        add_root_noise(&mut search.nodes[root], config.dirichlet_alpha, config.noise_epsilon, rng);
        for _ in 0..config.simulations {
            search.simulate(root)?;
        }
        result.simulations += config.simulations as u64;
        let node = &search.nodes[root];
        result.root_visit_log.push((node.child_visits(), node.visits));
        let visits: Vec<u64> = node.edges.iter().map(|e| e.n).collect();
        let trie_node = node.trie;
        let pi = root_policy(&visits, tau, deterministic, |a| !search.trie.child_exhausted(trie_node, a))?;
        let a = sample(&pi, rng);
        result.encodings.push(search.encode(root));
        result.policies.push(pi);
        result.actions.push(a);
        root = search.child(root, a)?;
    }
    let final_state = &search.nodes[root].state;
    result.fidelity = env.reward(final_state);
    trie.mark_terminal(&result.actions);
    Ok(result)
}
