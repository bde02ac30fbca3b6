use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;

use qexplore::harness::config::BudgetSection;
use qexplore::harness::{analyze_dir, export_dir, run, sweep, CellResult, ExperimentConfig};
use qexplore::record::Budget;
use qexplore::{Error, Result};

#[derive(Parser)]
#[command(name = "qexplore", version, about = "Quantum gate control optimizers and experiment harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one optimizer at one duration.
    Run(RunArgs),
    /// Run every (optimizer, duration) cell of a config.
    Sweep(RunArgs),
    /// Write learning curves and symmetry trajectories for finished runs.
    Analyze(DirArgs),
    /// Write every solution of finished runs as dimensionless pulses.
    Export(DirArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    #[arg(long, value_name = "N", conflicts_with = "budget_episodes")]
    budget_seconds: Option<f64>,
    #[arg(long, value_name = "N")]
    budget_episodes: Option<u64>,
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long, value_name = "N")]
    workers: Option<usize>,
}

#[derive(Args)]
struct DirArgs {
    /// Run or sweep directory.
    #[arg(value_name = "DIR", required_unless_present = "out")]
    dir: Option<PathBuf>,
    #[arg(long, value_name = "DIR", conflicts_with = "dir")]
    out: Option<PathBuf>,
}

impl DirArgs {
    fn path(self) -> PathBuf {
        self.dir.or(self.out).expect("clap requires one of them")
    }
}

fn load(args: RunArgs) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(s) = args.budget_seconds {
        cfg.budget = BudgetSection::from_budget(Budget::Seconds(s));
    }
    if let Some(n) = args.budget_episodes {
        cfg.budget = BudgetSection::from_budget(Budget::Episodes(n));
    }
    if let Some(out) = args.out {
        cfg.out = Some(out);
    }
    if let Some(w) = args.workers {
        cfg.workers = w;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn report(r: &CellResult) {
    let best = r
        .summary
        .best
        .as_ref()
        .map_or("none".to_string(), |b| format!("{:.3e}", b.infidelity));
    println!(
        "{}: {} records, best infidelity {best}, stop {}, seed {} -> {}",
        r.summary.cell,
        r.summary.records,
        r.summary.stop,
        r.summary.seed,
        r.dir.display()
    );
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(args) => {
            let cfg = load(args)?;
            info!("config hash {}", cfg.hash()?);
            report(&run(&cfg)?);
        }
        Command::Sweep(args) => {
            let cfg = load(args)?;
            info!("config hash {}", cfg.hash()?);
            for r in sweep(&cfg)? {
                report(&r);
            }
        }
        Command::Analyze(args) => {
            for cell in analyze_dir(&args.path())? {
                let fmt = |x: Option<f64>| x.map_or("none".to_string(), |v| format!("{v:.3e}"));
                println!(
                    "{}: {} records, best infidelity {}, success fraction {}",
                    cell.cell,
                    cell.records,
                    fmt(cell.best_infidelity),
                    cell.success_fraction.map_or("none".to_string(), |v| format!("{v:.4}"))
                );
            }
        }
        Command::Export(args) => {
            for path in export_dir(&args.path())? {
                println!("{}", path.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    e.exit_code().try_into().unwrap_or(1)
}
