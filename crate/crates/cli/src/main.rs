use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use prodgrid::experiments::{
    calibrate_constants, catalog, emit_report, run_scenario, ExperimentConfig,
};
use prodgrid::Error;

#[derive(Parser)]
#[command(name = "prodgrid", version, about = "Seeded uniform-estimation scenarios")]
struct Cli {
    /// Worker threads for trial execution. Results do not depend on it.
    #[arg(long, env = "PRODGRID_WORKERS", global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Overrides {
    /// JSON config; unknown fields are rejected.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Where to write the JSON report (CSV goes next to it).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Print the scenario catalog.
    List,
    /// Run one scenario; exits 0 iff its assertion passes.
    Run {
        scenario: String,
        #[command(flatten)]
        args: Overrides,
    },
    /// Find the smallest passing planner constant on a grid.
    Calibrate {
        scenario: String,
        #[command(flatten)]
        args: Overrides,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        /// Comma-separated constants to try.
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<f64>>,
    },
}

fn load(scenario: &str, args: &Overrides) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &args.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    match cfg.scenario.as_deref() {
        Some(s) if s != scenario => {
            return Err(Error::InvalidConfig(format!(
                "config is for {s}, command asked for {scenario}"
            )))
        }
        _ => cfg.scenario = Some(scenario.to_string()),
    }
    cfg.seed = args.seed.or(cfg.seed);
    cfg.trials = args.trials.or(cfg.trials);
    cfg.out = args.out.clone().or(cfg.out);
    Ok(cfg)
}

fn execute(cli: Cli) -> Result<bool, Error> {
    match cli.command {
        Command::List => {
            for s in catalog() {
                let constant = s.constant.map(|c| format!(" [calibrates {c}]")).unwrap_or_default();
                println!("{:<24} {:<4} {}{constant}", s.name, s.criterion, s.claim);
            }
            Ok(true)
        }
        Command::Run { scenario, args } => {
            let cfg = load(&scenario, &args)?;
            let result = run_scenario(&cfg)?;
            println!("{}", result.summary_line());
            if let Some(out) = &cfg.out {
                for p in emit_report(&result, out)? {
                    eprintln!("wrote {}", p.display());
                }
            }
            Ok(result.passed)
        }
        Command::Calibrate {
            scenario,
            args,
            eps,
            delta,
            grid,
        } => {
            let mut cfg = load(&scenario, &args)?;
            cfg.eps = eps.or(cfg.eps);
            cfg.delta = delta.or(cfg.delta);
            cfg.calibration_grid = grid.or(cfg.calibration_grid);
            cfg.calibration_trials = cfg.trials.take().or(cfg.calibration_trials);
            cfg.calibration_seed = cfg.seed.or(cfg.calibration_seed);
            let cal = calibrate_constants(&cfg)?;
            let json = serde_json::to_string_pretty(&cal)?;
            match &cfg.out {
                Some(p) => std::fs::write(p, json + "\n")?,
                None => println!("{json}"),
            }
            match cal.chosen {
                Some(c) => eprintln!("{} = {c}", cal.constant),
                None => eprintln!("{} unbounded on the grid (max {})", cal.constant, cal.value()),
            }
            Ok(cal.chosen.is_some())
        }
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    if let Some(n) = cli.workers.filter(|&n| n > 0) {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
