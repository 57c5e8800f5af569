use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use wqei_core::indices::IndexCoefficients;
use wqei_core::pipeline::{self, Overrides, PipelineConfig, PipelineError, Stage};
use wqei_core::synth::SynthOptions;

/// Water-quality indices for small ponds in multispectral scenes.
#[derive(Debug, Parser)]
#[command(name = "wqei", version)]
struct Cli {
    /// Pipeline config file (key = value lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Overrides the config output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Comma-separated pond ids for the report, instead of a random pick.
    #[arg(long, global = true, value_delimiter = ',')]
    ponds: Option<Vec<String>>,

    /// More logging; repeat for debug output.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate scenes and write the catalog.
    Ingest,
    /// Compute indices over every pond window.
    Index,
    /// Match indices to lab parameters and fit coefficients.
    Calibrate,
    /// Write comparison tables, time series and maps.
    Report,
    /// Run ingest, index, calibrate and report.
    Run,
    /// Generate a synthetic dataset with a ready-to-run config.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Destination directory.
    #[arg(long)]
    dir: PathBuf,
    #[arg(long, default_value_t = 10)]
    scenes: usize,
    #[arg(long = "pond-count", default_value_t = 5)]
    pond_count: usize,
    /// Gaussian noise on pixels and lab values.
    #[arg(long, default_value_t = 0.01)]
    noise: f64,
    #[arg(long, default_value_t = 2.74)]
    alpha: f64,
    #[arg(long, default_value_t = 4.89)]
    beta: f64,
    #[arg(long, default_value_t = 1.8)]
    gamma: f64,
    #[arg(long, default_value_t = 2.0)]
    theta: f64,
}

fn usage(message: impl std::fmt::Display) -> ExitCode {
    eprintln!("wqei: {message}");
    ExitCode::from(Stage::Usage as u8)
}

fn failed(e: PipelineError) -> ExitCode {
    eprintln!("wqei: {e}");
    ExitCode::from(e.exit_code())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(Stage::Usage as u8);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    if let Command::Synth(a) = &cli.command {
        let coeffs = match IndexCoefficients::new(a.alpha, a.beta, a.gamma, a.theta) {
            Ok(c) => c,
            Err(e) => return usage(e),
        };
        if !(a.noise >= 0.0 && a.noise.is_finite()) || a.scenes == 0 || a.pond_count == 0 {
            return usage("synth needs --scenes and --pond-count above zero and a non-negative --noise");
        }
        let mut opts = SynthOptions::new(coeffs, a.scenes, cli.seed.unwrap_or(0), a.noise);
        opts.n_ponds = a.pond_count;
        return match pipeline::cmd_synth(&opts, &a.dir) {
            Ok(conf) => {
                println!("{}", conf.display());
                ExitCode::SUCCESS
            }
            Err(e) => failed(e),
        };
    }

    let Some(config) = &cli.config else {
        return usage("--config is required");
    };
    let overrides = Overrides {
        seed: cli.seed,
        output: cli.out.clone(),
        ponds: cli.ponds.clone(),
    };
    let cfg = match PipelineConfig::load(config, &overrides) {
        Ok(c) => c,
        Err(e) => return usage(e),
    };

    let outcome = match cli.command {
        Command::Ingest => pipeline::cmd_ingest(&cfg).map(|s| println!("{} scenes usable, {} invalid", s.ok, s.invalid)),
        Command::Index => pipeline::cmd_index(&cfg)
            .map(|s| println!("{} scenes indexed, {} failed, {} observations", s.scenes, s.failed, s.observations)),
        Command::Calibrate => pipeline::cmd_calibrate(&cfg).map(|r| {
            let c = r.fitted;
            println!(
                "alpha {} beta {} gamma {} theta {}",
                c.alpha(),
                c.beta(),
                c.gamma(),
                c.theta()
            );
            for (kind, param) in &r.matching.assignment {
                println!("{kind} -> {}", param.name());
            }
        }),
        Command::Report => pipeline::cmd_report(&cfg).map(|r| println!("{}", r.run_dir.display())),
        Command::Run => pipeline::cmd_run(&cfg).map(|r| println!("{}", r.run_dir.display())),
        Command::Synth(_) => unreachable!("handled above"),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => failed(e),
    }
}
