//! Post-run metrics and solution export.
//!
//! Every float written by this module uses 17 significant digits so files
//! read back to the same bits.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::PulseSequence;
use crate::record::{OptimizationRecord, Pulse};

pub const SOLUTIONS_FORMAT: &str = "qexplore-solutions/1";
pub const PULSE_FORMAT: &str = "qexplore-pulse/1";
pub const SWEEP_FORMAT: &str = "qexplore-sweep/1";

fn f17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Root-mean-square distance of a pulse from its time reversal, divided by
/// the pulse length: `(1/N) sqrt(sum_j |a_j - a_{N+1-j}|^2)`.
pub fn asymmetry(values: &[f64]) -> f64 {
    let n = values.len();
    if n == 0 {
        return 0.0;
    }
    let sum: f64 = (0..n).map(|j| (values[j] - values[n - 1 - j]).powi(2)).sum();
    sum.sqrt() / n as f64
}

/// Fraction of runs whose infidelity is within four times the best one.
pub fn success_fraction(infidelities: &[f64]) -> Result<f64> {
    if infidelities.is_empty() {
        return Err(Error::Domain("success fraction of an empty list".into()));
    }
    if let Some(bad) = infidelities.iter().find(|x| !x.is_finite() || **x < 0.0) {
        return Err(Error::Domain(format!("infidelity {bad} is not a finite non-negative number")));
    }
    let min = infidelities.iter().copied().fold(f64::INFINITY, f64::min);
    let threshold = 4.0 * min;
    let hits = infidelities.iter().filter(|&&x| x <= threshold).count();
    Ok(hits as f64 / infidelities.len() as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurvePoint {
    pub elapsed: f64,
    pub infidelity: f64,
    /// Lowest infidelity up to and including this point.
    pub best: f64,
}

/// Solution records in stream order with their best-so-far envelope.
pub fn learning_curve(records: &[OptimizationRecord]) -> Vec<CurvePoint> {
    let mut best = f64::INFINITY;
    records
        .iter()
        .filter(|r| r.stage.is_solution())
        .map(|r| {
            let infidelity = r.infidelity();
            best = best.min(infidelity);
            CurvePoint {
                elapsed: r.elapsed,
                infidelity,
                best,
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub duration: f64,
    pub best_infidelity: f64,
    /// Over every solution record of the cell.
    pub success_fraction: f64,
    pub records: usize,
}

/// Checks that durations are positive and strictly ascending.
pub fn validate_durations(durations: &[f64]) -> Result<()> {
    if durations.is_empty() {
        return Err(Error::Domain("need at least one duration".into()));
    }
    if let Some(d) = durations.iter().find(|d| !(d.is_finite() && **d > 0.0)) {
        return Err(Error::Domain(format!("duration {d:e} must be positive")));
    }
    for w in durations.windows(2) {
        if w[1] == w[0] {
            return Err(Error::Domain(format!("duplicate duration {:e}", w[0])));
        }
        if w[1] < w[0] {
            return Err(Error::Domain("durations must be ascending".into()));
        }
    }
    Ok(())
}

/// Summarizes one cell of a duration sweep.
pub fn sweep_row(duration: f64, records: &[OptimizationRecord]) -> Result<SweepRow> {
    let infidelities: Vec<f64> = records
        .iter()
        .filter(|r| r.stage.is_solution())
        .map(OptimizationRecord::infidelity)
        .collect();
    sweep_row_from(duration, &infidelities, records.len())
}

/// As [`sweep_row`], from the solution infidelities and the total record count.
pub fn sweep_row_from(duration: f64, solution_infidelities: &[f64], records: usize) -> Result<SweepRow> {
    if solution_infidelities.is_empty() {
        return Err(Error::Domain(format!("no solutions recorded at duration {duration:e}")));
    }
    Ok(SweepRow {
        duration,
        best_infidelity: solution_infidelities.iter().copied().fold(f64::INFINITY, f64::min),
        success_fraction: success_fraction(solution_infidelities)?,
        records,
    })
}

/// Runs `run` once per duration and tabulates the results.
pub fn duration_sweep<F>(durations: &[f64], mut run: F) -> Result<Vec<SweepRow>>
where
    F: FnMut(f64) -> Result<Vec<OptimizationRecord>>,
{
    validate_durations(durations)?;
    durations.iter().map(|&d| sweep_row(d, &run(d)?)).collect()
}

/// Writes a sweep table: `optimizer,duration_s,best_infidelity,success_fraction,records`.
pub fn write_sweep_csv(path: &Path, rows: &[(String, SweepRow)]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "# {SWEEP_FORMAT}")?;
    writeln!(out, "optimizer,duration_s,best_infidelity,success_fraction,records")?;
    for (optimizer, r) in rows {
        writeln!(
            out,
            "{optimizer},{},{},{},{}",
            f17(r.duration),
            f17(r.best_infidelity),
            f17(r.success_fraction),
            r.records
        )?;
    }
    out.flush()?;
    Ok(())
}

/// One exported solution. Pulse values are dimensionless: amplitudes in
/// units of the drive bound, or raw bits.
#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub pulse: Vec<f64>,
    pub infidelity: f64,
    pub tag: String,
    pub seed: u64,
}

/// Dimensionless pulse values of a record. Amplitudes are divided by
/// `max_drive`; actions map through `levels` (rad/s) when given and are
/// written as raw indices otherwise.
pub fn normalized_pulse(pulse: &Pulse, levels: Option<&[f64]>, max_drive: f64) -> Result<Vec<f64>> {
    Ok(match pulse {
        Pulse::Amplitudes(a) => a.iter().map(|x| x / max_drive).collect(),
        Pulse::Bits(b) => b.iter().map(|&x| f64::from(x)).collect(),
        Pulse::Actions(a) => {
            let Some(levels) = levels else {
                return Ok(a.iter().map(|&i| i as f64).collect());
            };
            a.iter()
                .map(|&i| {
                    levels
                        .get(i)
                        .map(|x| x / max_drive)
                        .ok_or_else(|| Error::InvalidInput(format!("action {i} has no amplitude level")))
                })
                .collect::<Result<_>>()?
        }
    })
}

/// Writes one solution per row: `a_0..a_{N-1},infidelity,tag,seed`.
pub fn export_solutions(path: &Path, solutions: &[Solution]) -> Result<()> {
    let n = solutions.first().map_or(0, |s| s.pulse.len());
    if let Some(s) = solutions.iter().find(|s| s.pulse.len() != n) {
        return Err(Error::Export(format!(
            "pulse lengths differ ({} and {}); export one duration at a time",
            n,
            s.pulse.len()
        )));
    }
    if let Some(s) = solutions.iter().find(|s| s.tag.contains([',', '\n', '"'])) {
        return Err(Error::Export(format!("tag `{}` contains a delimiter", s.tag)));
    }
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "# {SOLUTIONS_FORMAT}; pulse values in units of the drive bound (bits as 0/1)")?;
    let mut header: Vec<String> = (0..n).map(|k| format!("a_{k}")).collect();
    header.extend(["infidelity", "tag", "seed"].map(String::from));
    writeln!(out, "{}", header.join(","))?;
    for s in solutions {
        let mut row: Vec<String> = s.pulse.iter().map(|&x| f17(x)).collect();
        row.push(f17(s.infidelity));
        row.push(s.tag.clone());
        row.push(s.seed.to_string());
        writeln!(out, "{}", row.join(","))?;
    }
    out.flush()?;
    Ok(())
}

pub fn import_solutions(path: &Path) -> Result<Vec<Solution>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .has_headers(true)
        .from_path(path)?;
    let width = rdr.headers()?.len();
    if width < 3 {
        return Err(Error::InvalidInput("solutions file has fewer than three columns".into()));
    }
    let n = width - 3;
    let parse = |s: &str, what: &str| -> Result<f64> {
        s.parse()
            .map_err(|e| Error::InvalidInput(format!("bad {what} `{s}`: {e}")))
    };
    rdr.records()
        .map(|row| {
            let row = row?;
            let pulse = (0..n).map(|k| parse(&row[k], "pulse value")).collect::<Result<_>>()?;
            Ok(Solution {
                pulse,
                infidelity: parse(&row[n], "infidelity")?,
                tag: row[n + 1].to_string(),
                seed: row[n + 2]
                    .parse()
                    .map_err(|e| Error::InvalidInput(format!("bad seed `{}`: {e}", &row[n + 2])))?,
            })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SymmetryPoint {
    pub index: u64,
    pub infidelity: f64,
    pub asymmetry: f64,
}

/// Infidelity and asymmetry of every record, in stream order.
pub fn symmetry_trajectory(
    records: &[OptimizationRecord],
    levels: Option<&[f64]>,
    max_drive: f64,
) -> Result<Vec<SymmetryPoint>> {
    records
        .iter()
        .map(|r| {
            Ok(SymmetryPoint {
                index: r.index,
                infidelity: r.infidelity(),
                asymmetry: asymmetry(&normalized_pulse(&r.pulse, levels, max_drive)?),
            })
        })
        .collect()
}

/// Writes a pulse as one amplitude (rad/s) per line under a comment header
/// carrying the step duration.
pub fn write_pulse_csv(path: &Path, pulse: &PulseSequence) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "# {PULSE_FORMAT}")?;
    writeln!(out, "# step_duration_s={}", f17(pulse.step_duration))?;
    writeln!(out, "# units=rad/s")?;
    writeln!(out, "amplitude")?;
    for a in &pulse.amplitudes {
        writeln!(out, "{}", f17(*a))?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_pulse_csv(path: &Path) -> Result<PulseSequence> {
    let mut step = None;
    let mut amplitudes = Vec::new();
    let mut header_seen = false;
    for (n, line) in BufReader::new(File::open(path)?).lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if let Some(comment) = line.strip_prefix('#') {
            let comment = comment.trim();
            if let Some(v) = comment.strip_prefix("step_duration_s=") {
                step = Some(v.parse::<f64>().map_err(|e| {
                    Error::InvalidInput(format!("line {}: bad step duration: {e}", n + 1))
                })?);
            } else if let Some(u) = comment.strip_prefix("units=") {
                if u != "rad/s" {
                    return Err(Error::InvalidInput(format!("unsupported units `{u}`")));
                }
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        if !header_seen {
            header_seen = true;
            if line == "amplitude" {
                continue;
            }
        }
        amplitudes.push(
            line.parse::<f64>()
                .map_err(|e| Error::InvalidInput(format!("line {}: bad amplitude `{line}`: {e}", n + 1)))?,
        );
    }
    let step = step.ok_or_else(|| Error::InvalidInput("pulse file lacks a step_duration_s header".into()))?;
    PulseSequence::new(amplitudes, step)
}
