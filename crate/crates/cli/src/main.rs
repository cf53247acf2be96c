//! `chemofv` command-line front end.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::error::CliError;

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "CHEMOFV_OUTPUT_DIR";

#[derive(Parser, Debug)]
#[command(name = "chemofv", version, about = "Finite volume chemotaxis simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct ConfigArgs {
    /// TOML configuration file.
    #[arg(long, short)]
    pub config: Option<PathBuf>,
    /// Preset providing defaults (see `chemofv presets`).
    #[arg(long, short)]
    pub preset: Option<String>,
    /// Override one value, e.g. `--set model.chi=80`; repeatable.
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Output directory; beats `[output] directory` and $CHEMOFV_OUTPUT_DIR.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one simulation and write its output files with a replayable manifest.
    Run {
        #[command(flatten)]
        config: ConfigArgs,
        /// Abort on any invariant or matrix-structure violation.
        #[arg(long)]
        strict: bool,
    },
    /// Temporal convergence study against a fine-step reference solution.
    Study {
        #[command(flatten)]
        config: ConfigArgs,
        /// Comma-separated time steps, largest first.
        #[arg(long, value_delimiter = ',')]
        dts: Option<Vec<f64>>,
        /// Comma-separated scheme variants.
        #[arg(long, value_delimiter = ',')]
        variants: Option<Vec<String>>,
        /// Time step of the reference run.
        #[arg(long)]
        reference_dt: Option<f64>,
    },
    /// Compare one corrected and one plain step against the coupled scheme.
    OracleCheck {
        #[command(flatten)]
        config: ConfigArgs,
        /// Coupled steps taken before the comparison.
        #[arg(long, default_value_t = chemofv::sim::ORACLE_WARMUP_STEPS)]
        warmup: usize,
    },
    /// Extract the cell column nearest to `x = x0` from a snapshot.
    Contour {
        /// Snapshot CSV written by `run`.
        #[arg(long)]
        snapshot: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        x0: f64,
        /// Output CSV; standard output when omitted.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// List the built-in presets.
    Presets,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result: Result<(), CliError> = match cli.command {
        Command::Run { config, strict } => commands::run(&config, strict),
        Command::Study { config, dts, variants, reference_dt } => {
            commands::study(&config, dts, variants, reference_dt)
        }
        Command::OracleCheck { config, warmup } => commands::oracle_check(&config, warmup),
        Command::Contour { snapshot, x0, out } => commands::contour(&snapshot, x0, out.as_deref()),
        Command::Presets => {
            for name in chemofv::model::PRESET_NAMES {
                println!("{name}");
            }
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
