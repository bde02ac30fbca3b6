//! Running configured experiments.
//!
//! A cell is one (optimizer, duration) pair. Its output directory holds
//! `records.csv`, `summary.json` and `config.toml`, the latter being the
//! cell's own config, which reproduces the cell when run on its own. The
//! cell seed is `derive_seed(master_seed, cell_id)`, so sweep cells and
//! standalone runs of the same cell see the same random streams.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;

use super::config::{cell_id, ExperimentConfig, OptimizerKind, Task};
use super::output::{check_output_dir, write_summary, BestSolution, CsvSink, Summary, CONFIG_FILE, RECORDS_FILE, SUMMARY_FILE, SUMMARY_FORMAT, VERSION};
use crate::alphazero::{AlphaZero, StopReason};
use crate::analysis::{sweep_row_from, write_sweep_csv, SweepRow};
use crate::baselines::{
    ga_optimize, grape_random_restarts, hybrid_optimize, q_learning_optimize, stochastic_descent, FilterSpec,
    GrapeProblem,
};
use crate::env::cache::{cache_key, cache_path, read_table, write_table};
use crate::env::{
    amplitude_grid, digital_environment, filtered_environment, filtered_pair_table, pwc_environment, sfq_environment,
    BitObjective, ControlEnvironment, EnvBits, FilteredTables, SfqBitObjective,
};
use crate::error::{Error, Result};
use crate::quantum::{ControlSystem, UnitaryOperator};
use crate::record::{ClockKind, Tracker};
use crate::seed::{derive_seed, stream};

/// Everything an optimizer may need for one task at one duration.
pub struct TaskSetup {
    pub env: Arc<dyn ControlEnvironment>,
    pub problem: Option<GrapeProblem>,
    pub bits: Option<Box<dyn BitObjective>>,
    /// Amplitude (rad/s) of each action on analog tasks.
    pub levels: Option<Vec<f64>>,
    pub max_drive: f64,
}

fn filtered_tables(cfg: &ExperimentConfig, system: &ControlSystem) -> Result<FilteredTables> {
    let Some(dir) = &cfg.table_cache else {
        return filtered_pair_table(system, &cfg.filtered);
    };
    let key = cache_key(&(&system.params, &cfg.filtered))?;
    let path = cache_path(dir, "filtered", &key);
    let amplitudes = amplitude_grid(cfg.filtered.amplitude_levels, system.max_drive());
    if let Some(flat) = read_table(&path, &key)? {
        return FilteredTables::from_flat(cfg.filtered, amplitudes, flat);
    }
    let tables = filtered_pair_table(system, &cfg.filtered)?;
    fs::create_dir_all(dir)?;
    write_table(&path, &key, &tables.to_flat())?;
    Ok(tables)
}

/// Builds the task of `cfg` for a gate of `duration_ns`.
pub fn build_task(cfg: &ExperimentConfig, duration_ns: f64) -> Result<TaskSetup> {
    let params = cfg.system.parameters();
    let system = ControlSystem::new(params)?;
    let duration = duration_ns * 1e-9;
    let target = || -> Result<UnitaryOperator> {
        cfg.system
            .target
            .build(params.levels_per_transmon, params.transmons)
            .map_err(|e| Error::config("system.target", e.to_string()))
    };
    let max_drive = system.max_drive();
    Ok(match cfg.task {
        Task::Pwc => {
            let env = pwc_environment(&system, target()?, &cfg.pwc, duration)?;
            let problem = GrapeProblem::new(system.clone(), target()?, env.horizon(), cfg.pwc.step_duration, 1, None)?;
            TaskSetup {
                levels: env.amplitude_levels().map(<[f64]>::to_vec),
                env: Arc::new(env),
                problem: Some(problem),
                bits: None,
                max_drive,
            }
        }
        Task::Filtered => {
            let tables = Arc::new(filtered_tables(cfg, &system)?);
            let levels = tables.amplitudes.clone();
            let env = filtered_environment(tables, target()?, duration)?;
            let problem = GrapeProblem::new(
                system.clone(),
                target()?,
                env.horizon(),
                cfg.filtered.step_duration,
                cfg.filtered.resolution,
                Some(FilterSpec {
                    sigma: cfg.filtered.sigma,
                }),
            )?;
            TaskSetup {
                env: Arc::new(env),
                problem: Some(problem),
                bits: None,
                levels: Some(levels),
                max_drive,
            }
        }
        Task::Sfq => {
            // Macro-actions depend on the master seed only, so every optimizer
            // in a sweep sees the same action set.
            let macro_seed = derive_seed(cfg.seed, "sfq-macro-actions");
            let env = sfq_environment(&system, target()?, &cfg.sfq, duration, macro_seed)?;
            let bits = SfqBitObjective::new(&system, target()?, &cfg.sfq, duration)?;
            TaskSetup {
                env: Arc::new(env),
                problem: None,
                bits: Some(Box::new(bits)),
                levels: None,
                max_drive,
            }
        }
        Task::Digital => {
            let env = Arc::new(digital_environment(&system, &cfg.digital)?);
            let expected = env.horizon() as f64 * cfg.digital.step_duration;
            if ((duration - expected) / expected).abs() > 1e-6 {
                return Err(Error::config(
                    "durations_ns",
                    format!(
                        "the digital task lasts {} ns (bits x step duration), got {duration_ns}",
                        expected * 1e9
                    ),
                ));
            }
            let bits = EnvBits::new(env.clone())?;
            TaskSetup {
                env,
                problem: None,
                bits: Some(Box::new(bits)),
                levels: None,
                max_drive,
            }
        }
    })
}

fn stop_name(stop: StopReason) -> &'static str {
    match stop {
        StopReason::Budget => "budget",
        StopReason::SearchSpaceExhausted => "search-space-exhausted",
    }
}

/// Runs one optimizer against `setup` under `tracker`; returns the stop reason.
pub fn run_optimizer(
    cfg: &ExperimentConfig,
    optimizer: OptimizerKind,
    setup: &TaskSetup,
    tracker: &mut Tracker<'_>,
    seed: u64,
) -> Result<&'static str> {
    let env = setup.env.as_ref();
    let need_problem = || {
        setup
            .problem
            .as_ref()
            .ok_or_else(|| Error::config("optimizers", "GRAPE needs an analog task"))
    };
    Ok(match optimizer {
        OptimizerKind::Alphazero => {
            let run = AlphaZero::new(env, cfg.alphazero.clone(), seed)?.run(tracker)?;
            stop_name(run.stop)
        }
        OptimizerKind::Ga => {
            let bits = setup
                .bits
                .as_deref()
                .ok_or_else(|| Error::config("optimizers", "GA needs a bit-string task"))?;
            ga_optimize(bits, &cfg.ga, tracker, &mut stream(seed, "ga"))?;
            "budget"
        }
        OptimizerKind::Qlearning => {
            q_learning_optimize(env, &cfg.qlearning, tracker, &mut stream(seed, "qlearning"))?;
            "budget"
        }
        OptimizerKind::Sd => {
            stochastic_descent(env, tracker, &mut stream(seed, "sd"))?;
            "budget"
        }
        OptimizerKind::Grape => {
            grape_random_restarts(need_problem()?, &cfg.grape, tracker, &mut stream(seed, "grape"))?;
            "budget"
        }
        OptimizerKind::Hybrid => {
            let out = hybrid_optimize(env, need_problem()?, &cfg.alphazero, &cfg.grape, &cfg.hybrid, tracker, seed)?;
            stop_name(out.search_stop)
        }
    })
}

#[derive(Clone, Debug)]
pub struct CellResult {
    pub dir: PathBuf,
    pub summary: Summary,
    pub row: Option<SweepRow>,
}

/// Runs one cell into `dir`.
pub fn run_cell(cfg: &ExperimentConfig, optimizer: OptimizerKind, duration_ns: f64, dir: &Path) -> Result<CellResult> {
    let cell_cfg = cfg.cell(optimizer, duration_ns);
    cell_cfg.validate()?;
    let hash = cell_cfg.hash()?;
    let id = cell_id(optimizer, duration_ns);
    let seed = derive_seed(cfg.seed, &id);
    fs::create_dir_all(dir)?;
    check_output_dir(dir, &hash)?;
    let setup = build_task(&cell_cfg, duration_ns)?;
    let budget = cell_cfg.budget.budget()?;

    let mut stored = cell_cfg.clone();
    stored.out = None;
    stored.table_cache = None;
    stored.workers = 1;
    let toml_text = toml::to_string(&stored).map_err(|e| Error::InvalidInput(format!("cannot serialize config: {e}")))?;
    fs::write(dir.join(CONFIG_FILE), toml_text)?;

    let mut sink = CsvSink::create(&dir.join(RECORDS_FILE), &hash, seed)?;
    let (stop, best, wall) = {
        let mut tracker = Tracker::new(&mut sink, cell_cfg.clock, budget, optimizer.as_str(), seed, hash.clone())?;
        let stop = run_optimizer(&cell_cfg, optimizer, &setup, &mut tracker, seed)?;
        let best = tracker.best().map(|r| BestSolution {
            index: r.index,
            fidelity: r.fidelity,
            infidelity: r.infidelity(),
            pulse: r.pulse.clone(),
        });
        (stop, best, tracker.clock.wall_seconds())
    };
    let (records, infidelities) = sink.finish()?;
    let summary = Summary {
        format: SUMMARY_FORMAT.into(),
        version: VERSION.into(),
        cell: id,
        task: cfg.task.as_str().into(),
        optimizer: optimizer.as_str().into(),
        duration_ns,
        config_hash: hash,
        master_seed: cfg.seed,
        seed,
        stop: stop.into(),
        records,
        solutions: infidelities.len(),
        best,
        wall_seconds: (cell_cfg.clock == ClockKind::Wall).then_some(wall),
    };
    write_summary(&dir.join(SUMMARY_FILE), &summary)?;
    let row = if infidelities.is_empty() {
        None
    } else {
        Some(sweep_row_from(duration_ns * 1e-9, &infidelities, records)?)
    };
    Ok(CellResult {
        dir: dir.to_path_buf(),
        summary,
        row,
    })
}

fn output_dir(cfg: &ExperimentConfig) -> Result<&Path> {
    cfg.out
        .as_deref()
        .ok_or_else(|| Error::config("out", "no output directory; set `out` or pass --out"))
}

/// Runs a single-cell config into its output directory.
pub fn run(cfg: &ExperimentConfig) -> Result<CellResult> {
    if cfg.optimizers.len() != 1 {
        return Err(Error::config("optimizers", "run takes one optimizer; use sweep for several"));
    }
    if cfg.durations_ns.len() != 1 {
        return Err(Error::config("durations_ns", "run takes one duration; use sweep for several"));
    }
    run_cell(cfg, cfg.optimizers[0], cfg.durations_ns[0], output_dir(cfg)?)
}

/// Runs every (optimizer, duration) cell under the same budget, each in
/// `out/<cell id>`, and writes `out/sweep.csv`.
pub fn sweep(cfg: &ExperimentConfig) -> Result<Vec<CellResult>> {
    let out = output_dir(cfg)?.to_path_buf();
    let cells: Vec<(OptimizerKind, f64)> = cfg
        .optimizers
        .iter()
        .flat_map(|&o| cfg.durations_ns.iter().map(move |&d| (o, d)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::InvalidInput(format!("cannot start workers: {e}")))?;
    let results: Vec<CellResult> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(o, d)| run_cell(cfg, o, d, &out.join(cell_id(o, d))))
            .collect::<Result<_>>()
    })?;
    let rows: Vec<(String, SweepRow)> = results
        .iter()
        .filter_map(|r| r.row.clone().map(|row| (r.summary.optimizer.clone(), row)))
        .collect();
    write_sweep_csv(&out.join("sweep.csv"), &rows)?;
    Ok(results)
}
