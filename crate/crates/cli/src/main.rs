//! `fcgboost` experiment runner: synthetic data, fitting, evaluation and
//! comparison tables with reproducible seeds.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use commands::{Axis, Part};
use config::{ExperimentConfig, UsageError, KEYS, OUT_DIR_ENV};

const EXIT_USAGE: u8 = 1;
const EXIT_RUNTIME: u8 = 2;

fn key_help(key: &str) -> &'static str {
    KEYS.iter().find(|(k, _)| *k == key).map_or("", |(_, h)| h)
}

macro_rules! config_flags {
    ($($field:ident),* $(,)?) => {
        /// Flags mirroring every config key.
        #[derive(Debug, Args)]
        struct ConfigFlags {
            /// Flat `key = value` config file; flags override it
            #[arg(long, value_name = "FILE")]
            config: Option<PathBuf>,
            $(
                #[arg(long, value_name = "VALUE", help = key_help(stringify!($field)))]
                $field: Option<String>,
            )*
        }

        impl ConfigFlags {
            fn pairs(&self) -> Vec<(&'static str, Option<&str>)> {
                vec![$((stringify!($field), self.$field.as_deref())),*]
            }
        }
    };
}

config_flags!(
    seed, reps, rep, precision, m, noise, data, label, positive, features, split, kernel, n, loss, selection, k,
    gamma, alpha, admm_iters, admm_tol, stall_tol, gd_iters, fcg_steps, baseline_steps, nu, epsilon, losses, n_grid,
    out,
);

impl ConfigFlags {
    /// Defaults, then the config file, then the output-directory variable,
    /// then flags.
    fn resolve(&self) -> Result<ExperimentConfig, UsageError> {
        let mut cfg = ExperimentConfig::default();
        if let Some(path) = &self.config {
            cfg.load_file(path)?;
        }
        if let Some(dir) = std::env::var_os(OUT_DIR_ENV).filter(|d| !d.is_empty()) {
            cfg.out = PathBuf::from(dir);
        }
        for (key, value) in self.pairs() {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Parser)]
#[command(name = "fcgboost", version, about = "Fully-corrective greedy boosting experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write one synthetic sample as CSV plus a `.meta` sidecar
    Synth {
        #[command(flatten)]
        flags: ConfigFlags,
        /// Which sample of the repetition to write
        #[arg(long, value_enum, default_value = "train")]
        part: Part,
        /// Output file (default OUT/synth_PART_repREP.csv)
        #[arg(long, value_name = "FILE")]
        output: Option<PathBuf>,
    },
    /// Fit one repetition, choosing k and the kernel on validation
    Fit {
        #[command(flatten)]
        flags: ConfigFlags,
        /// Model file to write (default OUT/model.json)
        #[arg(long, value_name = "FILE")]
        model: Option<PathBuf>,
    },
    /// Evaluate a saved model on --data, or on its regenerated test sample
    Eval {
        #[command(flatten)]
        flags: ConfigFlags,
        #[arg(long, value_name = "FILE")]
        model: PathBuf,
    },
    /// Run every repetition for each cell along one axis
    Compare {
        #[command(flatten)]
        flags: ConfigFlags,
        #[arg(long, value_enum)]
        axis: Axis,
    },
    /// Print the resolved config in canonical form
    ShowConfig {
        #[command(flatten)]
        flags: ConfigFlags,
    },
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Synth { flags, part, output } => commands::synth(&flags.resolve()?, part, output),
        Command::Fit { flags, model } => commands::fit(&flags.resolve()?, model),
        Command::Eval { flags, model } => commands::eval(&flags.resolve()?, &model),
        Command::Compare { flags, axis } => commands::compare(&flags.resolve()?, axis),
        Command::ShowConfig { flags } => {
            let cfg = flags.resolve()?;
            print!("# config_digest = {}\n{}", cfg.digest(), cfg.to_text());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.chain().any(|c| c.is::<UsageError>()) {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::from(EXIT_RUNTIME)
            }
        }
    }
}
