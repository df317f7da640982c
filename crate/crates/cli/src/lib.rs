//! `solarcast` command-line front end.
//!
//! Every subcommand works inside one run directory,
//! `<output.dir>/run-<hash of config and seed>`, reading what earlier
//! subcommands wrote there; `pipeline` runs them all in order. Outputs are a
//! pure function of the configuration, so repeated runs produce identical
//! bytes regardless of the thread count.

pub mod commands;
pub mod config;
pub mod paper_check;
pub mod summary;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

/// Failure classes, mapped to process exit codes.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad flags, unreadable or invalid configuration: exit 2.
    #[error("{0}")]
    Usage(String),
    /// Anything that fails while running: exit 1.
    #[error(transparent)]
    Runtime(#[from] anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Usage(_) => 2,
            Self::Runtime(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "solarcast", version, about = "Solar production classification pipeline")]
pub struct Cli {
    /// TOML configuration file; built-in defaults when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Run seed, overriding the config's `seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores). Never changes results.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output root, overriding `output.dir`.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Generate the synthetic dataset (data.csv).
    Synth,
    /// Build features.csv, labels.csv, scaling.json and label_spec.json.
    Preprocess,
    /// Write exploratory statistics as plot data under eda/.
    Eda,
    /// Train every configured model on the last window; writes models/.
    Train,
    /// Sliding-window validation; writes report.json and confusion plot data.
    Evaluate,
    /// Rank models from report.json; writes comparison.csv.
    Compare,
    /// All of the above, in order.
    Pipeline,
    /// Check the metric implementation against the published tables.
    PaperCheck,
}

/// Parse arguments and run. `Ok` carries text for stdout.
pub fn run<I, T>(args: I) -> Result<String, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    Ok(e.render().to_string())
                }
                _ => Err(CliError::Usage(e.render().to_string())),
            }
        }
    };
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(CliError::Usage("--threads must be >= 1".into()));
        }
        // A pool may already exist when called repeatedly in one process; the
        // thread count never affects results, so that is harmless.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    if cli.command == Command::PaperCheck {
        let report = paper_check::run();
        let text = report.render();
        return if report.passed() {
            Ok(text)
        } else {
            Err(CliError::Runtime(anyhow::anyhow!("{text}oracle mismatch")))
        };
    }
    let config = config::load(cli.config.as_deref(), cli.seed, cli.output.as_deref())?;
    let ctx = commands::Context::new(config);
    let out = match cli.command {
        Command::Synth => commands::synth(&ctx),
        Command::Preprocess => commands::preprocess(&ctx),
        Command::Eda => commands::eda(&ctx),
        Command::Train => commands::train(&ctx),
        Command::Evaluate => commands::evaluate(&ctx),
        Command::Compare => commands::compare(&ctx),
        Command::Pipeline => commands::pipeline(&ctx),
        Command::PaperCheck => unreachable!("handled above"),
    }?;
    Ok(out)
}
