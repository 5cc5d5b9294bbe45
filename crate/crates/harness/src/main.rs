use std::path::PathBuf;
use std::process::ExitCode;

use cgda_harness::config::WaxDemoConfig;
use cgda_harness::{emit_reports, generate_wax_demos, run_batch, ExperimentConfig, HarnessError};
use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Parser)]
#[command(name = "cgda", version, about = "Run goal-directed action execution experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every configuration of an experiment and write the reports.
    Run {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Override the base seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the repetition count.
        #[arg(long)]
        repetitions: Option<usize>,
        /// Worker threads.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Check a config file without running it.
    Validate { config: PathBuf },
    /// Write synthetic demonstrations as CSV files.
    GenDemos {
        #[command(subcommand)]
        action: DemoAction,
    },
}

#[derive(Subcommand)]
enum DemoAction {
    Wax {
        #[arg(long, default_value_t = 0.30)]
        diameter: f64,
        #[arg(long, default_value_t = 5)]
        count: usize,
        #[arg(long, default_value_t = 0.005)]
        noise: f64,
        /// Seconds per demonstration.
        #[arg(long, default_value_t = 8.0)]
        duration: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Run { config, out, seed, repetitions, jobs } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(r) = repetitions {
                cfg.repetitions = r;
            }
            cfg.validate()?;
            let report = run_batch(&cfg, jobs)?;
            emit_reports(&report, &out)?;
            for c in &report.configurations {
                println!("{}: mean evaluations {:.1}, invalid {}", c.label, c.mean_evaluations, c.invalid_count);
            }
            Ok(())
        }
        Command::Validate { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            // Building the action and environment surfaces bad demos and poses.
            cgda_harness::prepare(&cfg).map_err(|e| match e {
                HarnessError::Config(_) => e,
                other => HarnessError::Config(other.to_string()),
            })?;
            println!("{}: ok", config.display());
            Ok(())
        }
        Command::GenDemos { action: DemoAction::Wax { diameter, count, noise, duration, seed, out } } => {
            let cfg = WaxDemoConfig { diameter, count, noise, ..WaxDemoConfig::with_duration(duration) };
            if !(diameter > 0.0) || count == 0 || !(noise >= 0.0) || !(duration > 0.0) {
                return Err(HarnessError::Config("diameter and duration must be positive, count at least 1, noise non-negative".into()));
            }
            std::fs::create_dir_all(&out)?;
            let demos = generate_wax_demos(&cfg, &mut ChaCha8Rng::seed_from_u64(seed));
            for (i, d) in demos.iter().enumerate() {
                let path = out.join(format!("wax_{i:03}.csv"));
                d.save_csv(&path).map_err(|e| HarnessError::Runtime(e.to_string()))?;
            }
            println!("wrote {} demonstrations to {}", demos.len(), out.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
