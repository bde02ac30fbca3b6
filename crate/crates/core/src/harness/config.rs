//! Experiment configuration files.
//!
//! Configs are TOML. Unknown keys are rejected and every error names the
//! offending key path. The config hash is the SHA-256 of the canonical JSON
//! form of everything that affects results; the master seed, output
//! directory and worker count are left out.

use std::f64::consts::TAU;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::alphazero::AlphaZeroConfig;
use crate::analysis::validate_durations;
use crate::baselines::{GaConfig, GrapeConfig, HybridConfig, QLearningConfig};
use crate::env::{DigitalConfig, FilteredConfig, PwcConfig, SfqConfig};
use crate::error::{Error, Result};
use crate::quantum::{SystemParameters, TargetGate};
use crate::record::{Budget, ClockKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Sfq,
    Filtered,
    Pwc,
    /// Bit-string toy on the single transmon with a known optimum.
    Digital,
}

impl Task {
    pub fn as_str(self) -> &'static str {
        match self {
            Task::Sfq => "sfq",
            Task::Filtered => "filtered",
            Task::Pwc => "pwc",
            Task::Digital => "digital",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OptimizerKind {
    Alphazero,
    Ga,
    Qlearning,
    Sd,
    Grape,
    Hybrid,
}

impl OptimizerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            OptimizerKind::Alphazero => "alphazero",
            OptimizerKind::Ga => "ga",
            OptimizerKind::Qlearning => "qlearning",
            OptimizerKind::Sd => "sd",
            OptimizerKind::Grape => "grape",
            OptimizerKind::Hybrid => "hybrid",
        }
    }

    pub fn supports(self, task: Task) -> bool {
        match self {
            OptimizerKind::Alphazero | OptimizerKind::Qlearning | OptimizerKind::Sd => true,
            OptimizerKind::Ga => matches!(task, Task::Sfq | Task::Digital),
            OptimizerKind::Grape | OptimizerKind::Hybrid => matches!(task, Task::Pwc | Task::Filtered),
        }
    }
}

/// Physical system, frequencies given as `f = omega / 2 pi` in GHz.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SystemSection {
    pub detuning_ghz: f64,
    pub coupling_ghz: f64,
    pub max_drive_ghz: f64,
    pub levels_per_transmon: usize,
    pub transmons: usize,
    pub target: TargetGate,
}

impl Default for SystemSection {
    fn default() -> Self {
        Self {
            detuning_ghz: 0.35,
            coupling_ghz: 0.005,
            max_drive_ghz: 1.0,
            levels_per_transmon: 2,
            transmons: 2,
            target: TargetGate::SqrtZx,
        }
    }
}

impl SystemSection {
    pub fn parameters(&self) -> SystemParameters {
        SystemParameters {
            detuning: TAU * self.detuning_ghz * 1e9,
            coupling: TAU * self.coupling_ghz * 1e9,
            max_drive: TAU * self.max_drive_ghz * 1e9,
            levels_per_transmon: self.levels_per_transmon,
            transmons: self.transmons,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetSection {
    pub episodes: Option<u64>,
    pub seconds: Option<f64>,
}

impl BudgetSection {
    pub fn budget(&self) -> Result<Budget> {
        let b = match (self.episodes, self.seconds) {
            (Some(n), None) => Budget::Episodes(n),
            (None, Some(s)) => Budget::Seconds(s),
            _ => return Err(Error::config("budget", "set exactly one of `episodes` or `seconds`")),
        };
        b.validate()?;
        Ok(b)
    }

    pub fn from_budget(b: Budget) -> Self {
        match b {
            Budget::Episodes(n) => Self {
                episodes: Some(n),
                seconds: None,
            },
            Budget::Seconds(s) => Self {
                episodes: None,
                seconds: Some(s),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub task: Task,
    pub optimizers: Vec<OptimizerKind>,
    /// Gate durations in nanoseconds, ascending.
    pub durations_ns: Vec<f64>,
    pub budget: BudgetSection,
    #[serde(default = "default_clock")]
    pub clock: ClockKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default = "default_workers")]
    pub workers: usize,
    /// Directory for cached unitary tables; none disables caching.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table_cache: Option<PathBuf>,
    #[serde(default)]
    pub system: SystemSection,
    #[serde(default)]
    pub pwc: PwcConfig,
    #[serde(default)]
    pub filtered: FilteredConfig,
    #[serde(default)]
    pub sfq: SfqConfig,
    #[serde(default)]
    pub digital: DigitalConfig,
    #[serde(default)]
    pub alphazero: AlphaZeroConfig,
    #[serde(default)]
    pub ga: GaConfig,
    #[serde(default)]
    pub qlearning: QLearningConfig,
    #[serde(default)]
    pub grape: GrapeConfig,
    #[serde(default)]
    pub hybrid: HybridConfig,
}

fn default_clock() -> ClockKind {
    ClockKind::Wall
}

fn default_workers() -> usize {
    1
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let de = toml::Deserializer::new(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            Error::config(if path == "." { String::new() } else { path }, inner.message().trim().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::config(path.display().to_string(), format!("cannot read config: {e}")))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.optimizers.is_empty() {
            return Err(Error::config("optimizers", "list at least one optimizer"));
        }
        for (i, o) in self.optimizers.iter().enumerate() {
            if !o.supports(self.task) {
                return Err(Error::config(
                    format!("optimizers[{i}]"),
                    format!("`{}` does not run on the `{}` task", o.as_str(), self.task.as_str()),
                ));
            }
            if self.optimizers[..i].contains(o) {
                return Err(Error::config(format!("optimizers[{i}]"), "listed twice"));
            }
        }
        validate_durations(&self.durations_ns).map_err(|e| Error::config("durations_ns", e.to_string()))?;
        self.budget.budget()?;
        if self.workers == 0 {
            return Err(Error::config("workers", "must be at least 1"));
        }
        self.system
            .parameters()
            .validate()
            .map_err(|e| Error::config("system", e.to_string()))?;
        let section = |name: &str, r: Result<()>| r.map_err(|e| Error::config(name, e.to_string()));
        section("filtered", self.filtered.validate())?;
        section("sfq", self.sfq.validate())?;
        section("alphazero", self.alphazero.validate())?;
        section("ga", self.ga.validate())?;
        if !(self.qlearning.learning_rate >= 0.0 && self.qlearning.init_scale >= 0.0) {
            return Err(Error::config("qlearning", "learning_rate and init_scale must be >= 0"));
        }
        section("digital", self.digital.bits().map(|_| ()))?;
        if !(self.hybrid.search_fraction > 0.0 && self.hybrid.search_fraction < 1.0) {
            return Err(Error::config("hybrid.search_fraction", "must lie strictly between 0 and 1"));
        }
        Ok(())
    }

    /// The config restricted to one (optimizer, duration) cell.
    pub fn cell(&self, optimizer: OptimizerKind, duration_ns: f64) -> Self {
        Self {
            optimizers: vec![optimizer],
            durations_ns: vec![duration_ns],
            ..self.clone()
        }
    }

    /// Canonical JSON of the result-affecting fields.
    pub fn canonical_json(&self) -> Result<String> {
        let mut v = serde_json::to_value(self)?;
        if let Some(map) = v.as_object_mut() {
            for key in ["seed", "out", "workers", "table_cache"] {
                map.remove(key);
            }
        }
        Ok(serde_json::to_string(&v)?)
    }

    pub fn hash(&self) -> Result<String> {
        Ok(hex::encode(Sha256::digest(self.canonical_json()?.as_bytes())))
    }
}

/// Identifier of a sweep cell, e.g. `alphazero-60ns`.
pub fn cell_id(optimizer: OptimizerKind, duration_ns: f64) -> String {
    format!("{}-{}ns", optimizer.as_str(), duration_ns)
}
