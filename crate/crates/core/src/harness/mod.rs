//! Experiment harness: configs, cell runs, sweeps and result post-processing.

pub mod config;
pub mod output;
pub mod run;

use std::path::{Path, PathBuf};

pub use config::{cell_id, ExperimentConfig, OptimizerKind, Task};
pub use output::{read_records, read_summary, result_dirs, CsvSink, Summary};
pub use run::{build_task, run, run_cell, sweep, CellResult, TaskSetup};

use crate::analysis::{
    export_solutions, learning_curve, normalized_pulse, success_fraction, symmetry_trajectory, Solution,
};
use crate::env::amplitude_grid;
use crate::error::Result;

/// Amplitude levels (rad/s) and drive bound of a stored cell config.
fn pulse_scale(cfg: &ExperimentConfig) -> (Option<Vec<f64>>, f64) {
    let max_drive = cfg.system.parameters().max_drive;
    let levels = match cfg.task {
        Task::Pwc => Some(amplitude_grid(cfg.pwc.amplitude_levels, max_drive)),
        Task::Filtered => Some(amplitude_grid(cfg.filtered.amplitude_levels, max_drive)),
        Task::Sfq | Task::Digital => None,
    };
    (levels, max_drive)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CellAnalysis {
    pub dir: PathBuf,
    pub cell: String,
    pub records: usize,
    pub best_infidelity: Option<f64>,
    pub success_fraction: Option<f64>,
}

/// Writes `learning_curve.csv` and `symmetry.csv` into every cell under `dir`.
pub fn analyze_dir(dir: &Path) -> Result<Vec<CellAnalysis>> {
    result_dirs(dir)?
        .into_iter()
        .map(|cell| {
            let cfg = ExperimentConfig::load(&cell.join(output::CONFIG_FILE))?;
            let summary = read_summary(&cell.join(output::SUMMARY_FILE))?;
            let records = read_records(&cell.join(output::RECORDS_FILE))?;
            let (levels, max_drive) = pulse_scale(&cfg);

            let curve = learning_curve(&records);
            let mut w = csv::Writer::from_path(cell.join("learning_curve.csv"))?;
            for p in &curve {
                w.serialize(p)?;
            }
            w.flush()?;
            let mut w = csv::Writer::from_path(cell.join("symmetry.csv"))?;
            for p in symmetry_trajectory(&records, levels.as_deref(), max_drive)? {
                w.serialize(p)?;
            }
            w.flush()?;

            let infidelities: Vec<f64> = curve.iter().map(|p| p.infidelity).collect();
            Ok(CellAnalysis {
                dir: cell,
                cell: summary.cell,
                records: records.len(),
                best_infidelity: curve.last().map(|p| p.best),
                success_fraction: if infidelities.is_empty() {
                    None
                } else {
                    Some(success_fraction(&infidelities)?)
                },
            })
        })
        .collect()
}

/// Writes `solutions.csv` (every solution record, dimensionless pulses)
/// into every cell under `dir`. Returns the files written.
pub fn export_dir(dir: &Path) -> Result<Vec<PathBuf>> {
    result_dirs(dir)?
        .into_iter()
        .map(|cell| {
            let cfg = ExperimentConfig::load(&cell.join(output::CONFIG_FILE))?;
            let summary = read_summary(&cell.join(output::SUMMARY_FILE))?;
            let records = read_records(&cell.join(output::RECORDS_FILE))?;
            let (levels, max_drive) = pulse_scale(&cfg);
            let solutions = records
                .iter()
                .filter(|r| r.stage.is_solution())
                .map(|r| {
                    Ok(Solution {
                        pulse: normalized_pulse(&r.pulse, levels.as_deref(), max_drive)?,
                        infidelity: r.infidelity(),
                        tag: format!("{}/{}/{}", summary.cell, r.stage.as_str(), r.index),
                        seed: r.seed,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let path = cell.join("solutions.csv");
            export_solutions(&path, &solutions)?;
            Ok(path)
        })
        .collect()
}
