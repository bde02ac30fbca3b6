//! Result files: `records.csv`, `summary.json` and the resolved config.
//!
//! `records.csv` starts with a comment line naming the format, toolkit
//! version, config hash and seed, then the header
//! `index,optimizer,group,stage,parent,elapsed,fidelity,infidelity,pulse_kind,pulse,seed,config_hash`.
//! Floats carry 17 significant digits. `parent` is empty for root records.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::record::{OptimizationRecord, Pulse, RecordSink};

pub const RECORDS_FORMAT: &str = "qexplore-records/1";
pub const SUMMARY_FORMAT: &str = "qexplore-summary/1";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const RECORDS_FILE: &str = "records.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const CONFIG_FILE: &str = "config.toml";

const HEADER: &str = "index,optimizer,group,stage,parent,elapsed,fidelity,infidelity,pulse_kind,pulse,seed,config_hash";

/// Streams records to CSV and keeps what the summary needs.
pub struct CsvSink {
    out: BufWriter<File>,
    pub count: usize,
    pub solution_infidelities: Vec<f64>,
}

impl CsvSink {
    pub fn create(path: &Path, config_hash: &str, seed: u64) -> Result<Self> {
        let mut out = BufWriter::new(File::create(path)?);
        writeln!(out, "# {RECORDS_FORMAT} version={VERSION} config_hash={config_hash} seed={seed}")?;
        writeln!(out, "{HEADER}")?;
        Ok(Self {
            out,
            count: 0,
            solution_infidelities: Vec::new(),
        })
    }

    pub fn finish(mut self) -> Result<(usize, Vec<f64>)> {
        self.out.flush()?;
        Ok((self.count, self.solution_infidelities))
    }
}

impl RecordSink for CsvSink {
    fn emit(&mut self, r: OptimizationRecord) -> Result<()> {
        writeln!(
            self.out,
            "{},{},{},{},{},{:.16e},{:.16e},{:.16e},{},{},{},{}",
            r.index,
            r.optimizer,
            r.group,
            r.stage,
            r.parent.map(|p| p.to_string()).unwrap_or_default(),
            r.elapsed,
            r.fidelity,
            r.infidelity(),
            r.pulse.kind(),
            r.pulse.encode(),
            r.seed,
            r.config_hash
        )?;
        self.count += 1;
        if r.stage.is_solution() {
            self.solution_infidelities.push(r.infidelity());
        }
        Ok(())
    }
}

#[derive(Debug, Deserialize)]
struct Row {
    index: u64,
    optimizer: String,
    group: u64,
    stage: String,
    parent: Option<u64>,
    elapsed: f64,
    fidelity: f64,
    #[allow(dead_code)]
    infidelity: f64,
    pulse_kind: String,
    pulse: String,
    seed: u64,
    config_hash: String,
}

pub fn read_records(path: &Path) -> Result<Vec<OptimizationRecord>> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path)?;
    rdr.deserialize::<Row>()
        .map(|row| {
            let row = row?;
            Ok(OptimizationRecord {
                optimizer: row.optimizer,
                index: row.index,
                group: row.group,
                stage: row.stage.parse()?,
                parent: row.parent,
                elapsed: row.elapsed,
                fidelity: row.fidelity,
                pulse: Pulse::decode(&row.pulse_kind, &row.pulse)?,
                seed: row.seed,
                config_hash: row.config_hash,
            })
        })
        .collect()
}

/// Config hash named in the first line of a records file.
pub fn records_hash(path: &Path) -> Result<Option<String>> {
    let mut first = String::new();
    BufReader::new(File::open(path)?).read_line(&mut first)?;
    Ok(first
        .split_whitespace()
        .find_map(|w| w.strip_prefix("config_hash="))
        .map(String::from))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BestSolution {
    pub index: u64,
    pub fidelity: f64,
    pub infidelity: f64,
    pub pulse: Pulse,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub format: String,
    pub version: String,
    pub cell: String,
    pub task: String,
    pub optimizer: String,
    pub duration_ns: f64,
    pub config_hash: String,
    pub master_seed: u64,
    pub seed: u64,
    pub stop: String,
    pub records: usize,
    pub solutions: usize,
    pub best: Option<BestSolution>,
    /// Present only under the wall clock, so logical-clock runs stay
    /// byte-identical across machines.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_seconds: Option<f64>,
}

pub fn write_summary(path: &Path, summary: &Summary) -> Result<()> {
    let mut text = serde_json::to_string_pretty(summary)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn read_summary(path: &Path) -> Result<Summary> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

/// Refuses to write into `dir` when it holds results of another config.
pub fn check_output_dir(dir: &Path, config_hash: &str) -> Result<()> {
    let mismatch = |found: String| Error::HashMismatch {
        dir: dir.to_path_buf(),
        found,
        expected: config_hash.to_string(),
    };
    let summary = dir.join(SUMMARY_FILE);
    if summary.exists() {
        let found = read_summary(&summary)
            .map(|s| s.config_hash)
            .unwrap_or_else(|_| "<unreadable summary>".into());
        if found != config_hash {
            return Err(mismatch(found));
        }
    }
    let records = dir.join(RECORDS_FILE);
    if records.exists() {
        let found = records_hash(&records)?.unwrap_or_else(|| "<no hash>".into());
        if found != config_hash {
            return Err(mismatch(found));
        }
    }
    Ok(())
}

/// Cell directories under a run or sweep directory, sorted by name.
pub fn result_dirs(dir: &Path) -> Result<Vec<PathBuf>> {
    if dir.join(RECORDS_FILE).exists() {
        return Ok(vec![dir.to_path_buf()]);
    }
    let mut out: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join(RECORDS_FILE).exists())
        .collect();
    out.sort();
    if out.is_empty() {
        return Err(Error::InvalidInput(format!("no {RECORDS_FILE} found under {}", dir.display())));
    }
    Ok(out)
}
