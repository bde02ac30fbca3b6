use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use qexplore::harness::output::{read_records, read_summary, CONFIG_FILE, RECORDS_FILE, SUMMARY_FILE};
use qexplore::harness::{analyze_dir, cell_id, export_dir, run, run_cell, sweep, ExperimentConfig, OptimizerKind};
use qexplore::record::Budget;
use qexplore::seed::derive_seed;
use qexplore::Error;

fn preset(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn toy_pwc(episodes: u64, out: &Path) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::load(&preset("toy-pwc.cfg")).unwrap();
    cfg.budget = qexplore::harness::config::BudgetSection::from_budget(Budget::Episodes(episodes));
    cfg.out = Some(out.to_path_buf());
    cfg.alphazero.network.width = 32;
    cfg
}

fn toy_digital(out: &Path) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::load(&preset("toy-digital.cfg")).unwrap();
    cfg.budget = qexplore::harness::config::BudgetSection::from_budget(Budget::Episodes(20));
    cfg.out = Some(out.to_path_buf());
    cfg
}

fn config_error_path(text: &str) -> String {
    match ExperimentConfig::parse(text) {
        Err(Error::Config { path, .. }) => path,
        other => panic!("expected a config error, got {other:?}"),
    }
}

const BASE: &str = "task = 'pwc'\noptimizers = ['alphazero']\ndurations_ns = [20.0]\n[budget]\nepisodes = 5\n";

#[test]
fn every_preset_parses_and_validates() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut names = Vec::new();
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "cfg") {
            ExperimentConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            names.push(path.file_name().unwrap().to_string_lossy().into_owned());
        }
    }
    for want in ["full-sfq.cfg", "full-filtered.cfg", "full-pwc.cfg", "toy-pwc.cfg", "toy-digital.cfg"] {
        assert!(names.iter().any(|n| n == want), "missing preset {want}");
    }
}

#[test]
fn config_errors_name_the_field() {
    assert_eq!(config_error_path(&format!("{BASE}[alphazero.search]\nc_puc = 1.0\n")), "alphazero.search.c_puc");
    assert_eq!(config_error_path(&format!("{BASE}[alphazero.network]\nwidth = 'wide'\n")), "alphazero.network.width");
    assert_eq!(config_error_path(&format!("{BASE}[system]\ntarget = 'cnot'\n")), "system.target");
    assert_eq!(config_error_path(&format!("{BASE}[grape]\nmemroy = 3\n")), "grape.memroy");
    assert_eq!(
        config_error_path("task = 'pwc'\noptimizers = ['alphazero']\ndurations_ns = ['x']\n[budget]\nepisodes = 5\n"),
        "durations_ns[0]"
    );
    assert_eq!(
        config_error_path("task = 'pwc'\noptimizers = ['alphazero', 'ga']\ndurations_ns = [20.0]\n[budget]\nepisodes = 5\n"),
        "optimizers[1]"
    );
    assert_eq!(
        config_error_path("task = 'pwc'\noptimizers = ['alphazero']\ndurations_ns = [20.0, 10.0]\n[budget]\nepisodes = 5\n"),
        "durations_ns"
    );
    assert_eq!(config_error_path(&format!("{BASE}[hybrid]\nsearch_fraction = 1.0\n")), "hybrid.search_fraction");
    assert_eq!(config_error_path("task = 'pwc'\noptimizers = ['alphazero']\ndurations_ns = [20.0]\n"), "");
}

#[test]
fn non_positive_budget_is_a_domain_error() {
    let text = "task = 'pwc'\noptimizers = ['alphazero']\ndurations_ns = [20.0]\n[budget]\nepisodes = 0\n";
    assert!(matches!(ExperimentConfig::parse(text), Err(Error::Domain(_))));
    let text = "task = 'pwc'\noptimizers = ['alphazero']\ndurations_ns = [20.0]\n[budget]\nseconds = -1.0\n";
    assert!(matches!(ExperimentConfig::parse(text), Err(Error::Domain(_))));
}

#[test]
fn hash_ignores_seed_and_output_location_only() {
    let dir = tempfile::tempdir().unwrap();
    let a = toy_pwc(5, dir.path());
    let mut b = a.clone();
    b.seed = 99;
    b.out = None;
    b.workers = 4;
    assert_eq!(a.hash().unwrap(), b.hash().unwrap());
    let mut c = a.clone();
    c.alphazero.search.c_puct = 2.0;
    assert_ne!(a.hash().unwrap(), c.hash().unwrap());
}

#[test]
fn five_episode_run_writes_five_rows_and_a_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = toy_pwc(5, dir.path());
    let result = run(&cfg).unwrap();
    let records = read_records(&dir.path().join(RECORDS_FILE)).unwrap();
    assert_eq!(records.len(), 5);
    let summary = read_summary(&dir.path().join(SUMMARY_FILE)).unwrap();
    assert_eq!(summary, result.summary);
    assert_eq!(summary.records, 5);
    assert_eq!(summary.config_hash, cfg.hash().unwrap());
    assert_eq!(summary.seed, derive_seed(0, "alphazero-20ns"));
    assert!(summary.wall_seconds.is_none());
    let best = summary.best.unwrap();
    let min = records.iter().map(|r| r.infidelity()).fold(f64::INFINITY, f64::min);
    assert_eq!(best.infidelity, min);
    for r in &records {
        assert_eq!(r.config_hash, summary.config_hash);
        assert_eq!(r.seed, summary.seed);
    }
    let first = fs::read_to_string(dir.path().join(RECORDS_FILE)).unwrap();
    assert!(first.starts_with(&format!("# qexplore-records/1 version={}", env!("CARGO_PKG_VERSION"))));
}

#[test]
fn stored_cell_config_reproduces_the_cell() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = toy_pwc(3, dir.path());
    run(&cfg).unwrap();
    let stored = ExperimentConfig::load(&dir.path().join(CONFIG_FILE)).unwrap();
    assert_eq!(stored.hash().unwrap(), cfg.hash().unwrap());
    assert_eq!(stored.seed, cfg.seed);
}

fn file_digests(dir: &Path) -> Vec<(PathBuf, String)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let bytes = fs::read(&path).unwrap();
                out.push((path.strip_prefix(dir).unwrap().to_path_buf(), hex::encode(Sha256::digest(bytes))));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn repeated_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    sweep(&toy_digital(a.path())).unwrap();
    sweep(&toy_digital(b.path())).unwrap();
    let da = file_digests(a.path());
    assert!(da.len() >= 13);
    assert_eq!(da, file_digests(b.path()));
}

#[test]
fn output_of_another_config_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = toy_pwc(2, dir.path());
    run(&cfg).unwrap();
    let before = fs::read(dir.path().join(RECORDS_FILE)).unwrap();
    let mut other = cfg.clone();
    other.alphazero.search.simulations = 7;
    match run(&other) {
        Err(e @ Error::HashMismatch { .. }) => assert_eq!(e.exit_code(), 2),
        other => panic!("expected a hash mismatch, got {other:?}"),
    }
    assert_eq!(fs::read(dir.path().join(RECORDS_FILE)).unwrap(), before);
    // Same config again overwrites in place.
    run(&cfg).unwrap();
    assert_eq!(fs::read(dir.path().join(RECORDS_FILE)).unwrap(), before);
}

#[test]
fn run_rejects_multi_cell_configs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = toy_digital(dir.path());
    assert!(matches!(run(&cfg), Err(Error::Config { ref path, .. }) if path == "optimizers"));
}

#[test]
fn two_by_two_sweep_has_four_distinct_cells() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = toy_pwc(3, dir.path());
    cfg.optimizers = vec![OptimizerKind::Alphazero, OptimizerKind::Sd];
    cfg.durations_ns = vec![10.0, 20.0];
    let results = sweep(&cfg).unwrap();
    assert_eq!(results.len(), 4);
    let cells: HashSet<_> = results.iter().map(|r| r.summary.cell.clone()).collect();
    assert_eq!(cells.len(), 4);
    let seeds: HashSet<_> = results.iter().map(|r| r.summary.seed).collect();
    assert_eq!(seeds.len(), 4);
    for r in &results {
        assert!(r.dir.join(SUMMARY_FILE).exists());
        assert_eq!(r.dir, dir.path().join(&r.summary.cell));
    }
    let table = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(table.lines().filter(|l| !l.starts_with('#')).count(), 5);
}

#[test]
fn one_by_one_sweep_equals_run() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run(&toy_pwc(3, a.path())).unwrap();
    sweep(&toy_pwc(3, b.path())).unwrap();
    let cell = b.path().join(cell_id(OptimizerKind::Alphazero, 20.0));
    for f in [RECORDS_FILE, SUMMARY_FILE, CONFIG_FILE] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(cell.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn sweep_cells_equal_standalone_runs() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = toy_digital(&dir.path().join("sweep"));
    cfg.workers = 2;
    sweep(&cfg).unwrap();
    for &o in &cfg.optimizers {
        let alone = dir.path().join(format!("alone-{}", o.as_str()));
        run_cell(&cfg, o, 3.2, &alone).unwrap();
        let cell = dir.path().join("sweep").join(cell_id(o, 3.2));
        for f in [RECORDS_FILE, SUMMARY_FILE, CONFIG_FILE] {
            assert_eq!(fs::read(&alone.join(f)).unwrap(), fs::read(cell.join(f)).unwrap(), "{o:?} {f}");
        }
    }
}

#[test]
fn child_seeds_do_not_collide() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut seen = HashSet::with_capacity(1_000_000);
    let master = 12345;
    for _ in 0..1_000_000 {
        let id: u64 = rng.gen();
        assert!(seen.insert(derive_seed(master, &format!("cell-{id:016x}"))));
    }
    assert_eq!(derive_seed(7, "a"), derive_seed(7, "a"));
    assert_ne!(derive_seed(7, "a"), derive_seed(8, "a"));
}

#[test]
fn child_seed_matches_its_definition() {
    let mut h = Sha256::new();
    h.update(42u64.to_le_bytes());
    h.update(b"ga-60ns");
    let d = h.finalize();
    assert_eq!(derive_seed(42, "ga-60ns"), u64::from_le_bytes(d[..8].try_into().unwrap()));
}

#[test]
fn analyze_and_export_cover_every_cell() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = toy_digital(dir.path());
    sweep(&cfg).unwrap();
    let report = analyze_dir(dir.path()).unwrap();
    assert_eq!(report.len(), 4);
    for cell in &report {
        assert!(cell.dir.join("learning_curve.csv").exists());
        assert!(cell.dir.join("symmetry.csv").exists());
        let f = cell.success_fraction.unwrap();
        assert!(f > 0.0 && f <= 1.0);
    }
    let files = export_dir(dir.path()).unwrap();
    assert_eq!(files.len(), 4);
    for path in files {
        let solutions = qexplore::analysis::import_solutions(&path).unwrap();
        assert!(!solutions.is_empty());
        assert!(solutions.iter().all(|s| s.pulse.len() == 8 && s.pulse.iter().all(|&b| b == 0.0 || b == 1.0)));
    }
}

#[test]
fn analog_exports_are_in_units_of_the_drive_bound() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = toy_pwc(4, dir.path());
    run(&cfg).unwrap();
    let files = export_dir(dir.path()).unwrap();
    let solutions = qexplore::analysis::import_solutions(&files[0]).unwrap();
    assert_eq!(solutions.len(), 4);
    for s in &solutions {
        assert_eq!(s.pulse.len(), 10);
        assert!(s.pulse.iter().all(|&a| (0.0..=1.0).contains(&a)));
    }
}
