//! Command-line driver wiring ingestion, calibration, attack generation,
//! detection and evaluation into flat-file reports.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 pipeline error.

mod commands;
mod config;
mod io;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use config::RunConfig;

#[derive(Debug)]
pub struct CliError {
    message: String,
    exit_code: i32,
}

impl CliError {
    pub fn usage(message: String) -> Self {
        Self {
            message,
            exit_code: 2,
        }
    }

    pub fn runtime(message: String) -> Self {
        Self {
            message,
            exit_code: 3,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "ilid",
    about = "Detects adversarial inputs to variable-length time-series forecasters by \
             checking forecast consistency across shortened subsamples",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Calibrate a detection threshold from the benign split and write the
    /// model file.
    Calibrate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Where to write the model (default: <out>/model.json).
        #[arg(long)]
        model: Option<PathBuf>,
        /// Override the run seed (also reseeds the attack section).
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads for batch stages.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Generate adversarial windows and report attack efficacy.
    Attack {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Attack these windows instead of the config's online split.
        #[arg(long)]
        windows: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Score windows against a calibrated model and emit verdicts.
    Detect {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Detect on these windows instead of the config's online split.
        #[arg(long)]
        windows: Option<PathBuf>,
        /// Also emit the report-only subsample-vs-full-forecast comparison.
        #[arg(long)]
        diagnostic: bool,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Detect clean and adversarial populations and report FRR/FAR.
    Evaluate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Clean windows (default: the config's online split).
        #[arg(long)]
        clean: Option<PathBuf>,
        /// Adversarial windows file.
        #[arg(long)]
        adv: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Rebuild the evaluation summary and histogram from verdict files.
    Report {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        clean_verdicts: PathBuf,
        #[arg(long)]
        adv_verdicts: PathBuf,
    },
}

fn configure_jobs(jobs: Option<usize>) {
    if let Some(n) = jobs {
        // Ignore the error if a pool already exists (only happens in-process
        // during tests).
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global();
    }
}

fn load_config(path: &std::path::Path, seed: Option<u64>) -> Result<RunConfig, CliError> {
    let mut config = RunConfig::load(path)?;
    if let Some(seed) = seed {
        config.seed = seed;
        if let Some(attack) = &mut config.attack {
            attack.seed = seed;
        }
    }
    Ok(config)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Calibrate {
            config,
            out,
            model,
            seed,
            jobs,
        } => {
            configure_jobs(jobs);
            let config = load_config(&config, seed)?;
            commands::cmd_calibrate(&config, &out, model)
        }
        Command::Attack {
            config,
            out,
            windows,
            seed,
            jobs,
        } => {
            configure_jobs(jobs);
            let config = load_config(&config, seed)?;
            commands::cmd_attack(&config, &out, windows)
        }
        Command::Detect {
            config,
            model,
            out,
            windows,
            diagnostic,
            seed,
            jobs,
        } => {
            configure_jobs(jobs);
            let config = load_config(&config, seed)?;
            commands::cmd_detect(&config, &model, &out, windows, diagnostic)
        }
        Command::Evaluate {
            config,
            model,
            out,
            clean,
            adv,
            seed,
            jobs,
        } => {
            configure_jobs(jobs);
            let config = load_config(&config, seed)?;
            commands::cmd_evaluate(&config, &model, &out, clean, &adv)
        }
        Command::Report {
            model,
            out,
            clean_verdicts,
            adv_verdicts,
        } => commands::cmd_report(&model, &out, &clean_verdicts, &adv_verdicts),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        eprintln!("error: {}", err.message);
        std::process::exit(err.exit_code);
    }
}
