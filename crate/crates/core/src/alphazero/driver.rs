//! Training loop: self-play episodes fill the replay buffer, the network is
//! trained with one batch per environment step, and the search uses a
//! snapshot of the weights refreshed every few batches.

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::exhaust::ExhaustionTrie;
use super::search::{run_episode, SearchConfig};
use crate::env::ControlEnvironment;
use crate::error::{Error, Result};
use crate::neural::{encoding_len, Example, Network, NetworkConfig, ReplayBuffer, ReplayRecord};
use crate::record::{Pulse, Stage, Tracker};
use crate::seed::stream;

/// Network settings that do not depend on the task.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NetworkSettings {
    pub width: usize,
    pub trunk_layers: usize,
    pub l2: f64,
    pub learning_rate: f64,
    pub bn_momentum: f64,
    pub bn_eps: f64,
}

impl Default for NetworkSettings {
    fn default() -> Self {
        let c = NetworkConfig::new(1, 1);
        Self {
            width: c.width,
            trunk_layers: c.trunk_layers,
            l2: c.l2,
            learning_rate: c.learning_rate,
            bn_momentum: c.bn_momentum,
            bn_eps: c.bn_eps,
        }
    }
}

impl NetworkSettings {
    pub fn for_task(&self, input: usize, actions: usize) -> NetworkConfig {
        NetworkConfig {
            input,
            actions,
            width: self.width,
            trunk_layers: self.trunk_layers,
            l2: self.l2,
            learning_rate: self.learning_rate,
            bn_momentum: self.bn_momentum,
            bn_eps: self.bn_eps,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AlphaZeroConfig {
    pub search: SearchConfig,
    pub network: NetworkSettings,
    pub replay_capacity: usize,
    /// Records required before training starts.
    pub min_replay: usize,
    pub batch_size: usize,
    /// Training batches between copies of the weights into the search.
    pub snapshot_interval: usize,
}

impl Default for AlphaZeroConfig {
    fn default() -> Self {
        Self {
            search: SearchConfig::default(),
            network: NetworkSettings::default(),
            replay_capacity: 100_000,
            min_replay: 1000,
            batch_size: 64,
            snapshot_interval: 25,
        }
    }
}

impl AlphaZeroConfig {
    pub fn validate(&self) -> Result<()> {
        self.search.validate()?;
        self.network.for_task(1, 1).validate()?;
        if self.replay_capacity == 0 || self.batch_size == 0 || self.snapshot_interval == 0 {
            return Err(Error::Domain(
                "replay_capacity, batch_size and snapshot_interval must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// A finished episode as emitted.
#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub record_index: u64,
    pub episode: u64,
    pub actions: Vec<usize>,
    pub fidelity: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    Budget,
    SearchSpaceExhausted,
}

pub struct AlphaZeroRun {
    pub stop: StopReason,
    pub solutions: Vec<Solution>,
    pub network: Network,
    pub batches: u64,
}

/// Self-play agent for one environment.
pub struct AlphaZero<'a> {
    env: &'a dyn ControlEnvironment,
    config: AlphaZeroConfig,
    train_net: Network,
    search_net: Network,
    replay: ReplayBuffer,
    trie: ExhaustionTrie,
    search_rng: ChaCha8Rng,
    train_rng: ChaCha8Rng,
    episodes: u64,
    batches: u64,
}

impl<'a> AlphaZero<'a> {
    pub fn new(env: &'a dyn ControlEnvironment, config: AlphaZeroConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let net_cfg = config.network.for_task(encoding_len(env.dim()), env.action_count());
        let train_net = Network::new(net_cfg, &mut stream(seed, "network-init"))?;
        Ok(Self {
            env,
            search_net: train_net.clone(),
            train_net,
            replay: ReplayBuffer::new(config.replay_capacity),
            trie: ExhaustionTrie::new(env.action_count()),
            search_rng: stream(seed, "search"),
            train_rng: stream(seed, "training"),
            config,
            episodes: 0,
            batches: 0,
        })
    }

    pub fn with_network(mut self, net: Network) -> Result<Self> {
        if net.config.architecture() != self.train_net.config.architecture() {
            return Err(Error::Checkpoint("network does not match the task".into()));
        }
        self.search_net = net.clone();
        self.train_net = net;
        Ok(self)
    }

    pub fn replay(&self) -> &ReplayBuffer {
        &self.replay
    }

    pub fn trie(&self) -> &ExhaustionTrie {
        &self.trie
    }

    fn train_batch(&mut self) -> Result<()> {
        let batch = self.replay.sample(self.config.batch_size, &mut self.train_rng);
        let examples: Vec<Example> = batch.iter().map(|r| r.example()).collect();
        self.train_net.sgd_step(&examples)?;
        self.batches += 1;
        if self.batches % self.config.snapshot_interval as u64 == 0 {
            self.search_net = self.train_net.clone();
        }
        Ok(())
    }

    /// Plays episodes until the tracker's budget runs out or every action
    /// sequence has been produced.
    pub fn run(mut self, tracker: &mut Tracker<'_>) -> Result<AlphaZeroRun> {
        let mut solutions = Vec::new();
        let stop = loop {
            if tracker.exhausted() {
                break StopReason::Budget;
            }
            let tau = self.config.search.temperature(self.episodes);
            let episode = match run_episode(
                self.env,
                &self.search_net,
                &self.config.search,
                &mut self.trie,
                tau,
                &mut self.search_rng,
            ) {
                Ok(e) => e,
                Err(Error::SearchSpaceExhausted { episodes }) => {
                    log::info!("all action sequences used after {episodes} episodes");
                    break StopReason::SearchSpaceExhausted;
                }
                Err(e) => return Err(e),
            };
            tracker.work(episode.simulations);
            let z = episode.fidelity.clamp(0.0, 1.0);
            for (enc, pi) in episode.encodings.iter().zip(&episode.policies) {
                self.replay.push(ReplayRecord::new(enc.clone(), pi.clone(), z)?);
            }
            let index = tracker.emit(
                Stage::Episode,
                self.episodes,
                None,
                episode.fidelity,
                Pulse::Actions(episode.actions.clone()),
            )?;
            solutions.push(Solution {
                record_index: index,
                episode: self.episodes,
                actions: episode.actions.clone(),
                fidelity: episode.fidelity,
            });
            self.episodes += 1;
            tracker.complete_unit();
            if self.replay.len() >= self.config.min_replay {
                for _ in 0..episode.actions.len() {
                    self.train_batch()?;
                }
                tracker.work(episode.actions.len() as u64);
            }
        };
        Ok(AlphaZeroRun {
            stop,
            solutions,
            network: self.train_net,
            batches: self.batches,
        })
    }
}
