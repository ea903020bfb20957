use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use clap::{Parser, Subcommand};
use qfree_cli::config::ExperimentConfig;
use qfree_cli::{commands, exit, plot, CliError};

/// Modular theory of standard subspaces and Klein–Gordon mass-change
/// experiments.
#[derive(Debug, Parser)]
#[command(name = "qfree", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Report on the standard subspace spanned by the generators in a spec file.
    Modular {
        spec_file: PathBuf,
        /// Also write the report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Seeded randomized invariant suite.
    Suite {
        #[arg(long)]
        seed: u64,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
    },
    /// Klein–Gordon mass sweep driven by the [sweep] section of a config.
    KgSweep {
        #[arg(long)]
        config: PathBuf,
    },
    /// Kernel-quadrature bounds driven by the [kernel] section of a config.
    KgKernel {
        #[arg(long)]
        config: PathBuf,
    },
    /// gnuplot script for a sweep CSV.
    Plot {
        csv: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a default config (`d2-sweep`, `d1-zero-mean` or `kernel`).
    DefaultConfig { kind: String },
}

fn verdict(text: String, ok: bool, what: &str) -> Result<String, CliError> {
    if ok {
        Ok(text)
    } else {
        Err(CliError::Invariant(format!("{text}{what} failed")))
    }
}

fn run(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Modular { spec_file, out } => {
            let (report, ok) = commands::modular_report(&spec_file)?;
            if let Some(path) = out {
                std::fs::write(path, &report)?;
            }
            verdict(report, ok, "modular invariant checks")
        }
        Command::Suite { seed, trials } => {
            let (summary, ok) = commands::suite(seed, trials as usize)?;
            verdict(summary, ok, "randomized suite")
        }
        Command::KgSweep { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let cancel = Arc::new(AtomicBool::new(false));
            let flag = cancel.clone();
            // a second handler cannot be installed; the sweep then simply runs to completion
            let _ = ctrlc::set_handler(move || flag.store(true, Ordering::SeqCst));
            commands::kg_sweep(&cfg, Some(&cancel))
        }
        Command::KgKernel { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            commands::kg_kernel(&cfg)
        }
        Command::Plot { csv, out } => {
            let (path, warnings) = plot::emit_plot(&csv, out.as_deref())?;
            for w in warnings {
                eprintln!("warning: {w}");
            }
            Ok(format!("wrote {}\n", path.display()))
        }
        Command::DefaultConfig { kind } => {
            let cfg = match kind.as_str() {
                "d2-sweep" => ExperimentConfig::default_d2_sweep(),
                "d1-zero-mean" => ExperimentConfig::default_d1_zero_mean(),
                "kernel" => ExperimentConfig::default_kernel(),
                other => return Err(CliError::Input(format!("unknown config kind `{other}`"))),
            };
            Ok(cfg.emit())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::from(exit::OK as u8)
        }
        Err(e) => {
            match &e {
                CliError::Input(m) => eprintln!("error: {m}"),
                CliError::Invariant(m) | CliError::Interrupted(m) => println!("{m}"),
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
