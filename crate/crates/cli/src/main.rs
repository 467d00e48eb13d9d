//! `nstrans` command-line front end.
//!
//! Exit codes: 0 success, 2 bad input or configuration, 3 runtime failure
//! (solver blow-up, every sweep run failed, I/O while writing results).

mod commands;
mod manifest;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "nstrans", version, about = "Spectral 2D flow simulation, transition diagnostics and scaling fits")]
struct Cli {
    /// Worker threads for sweeps (default: available cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Override the random seed of random initial conditions and synthetic data.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Leave wall-clock timestamps out of SVG output.
    #[arg(long, global = true)]
    no_timestamp: bool,
    /// Suppress progress messages (warnings and errors are still printed).
    #[arg(short, long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the solver and write snapshot files plus a manifest.
    Simulate {
        config: PathBuf,
        out_dir: PathBuf,
    },
    /// Print the diagnostics table for a set of snapshots.
    Diagnose {
        /// Directory of `.bin` snapshots or a glob pattern.
        snapshots: String,
        /// Flow parameters, bare or inside a full solver config.
        params: PathBuf,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        opts: DiagnoseArgs,
    },
    /// Transition-time sweep over Reynolds numbers, with CSV and log-log plot.
    Sweep {
        config: PathBuf,
        out_dir: PathBuf,
    },
    /// Fit tau = k1 Re^b to a sweep CSV or to a synthetic dataset.
    Fit(FitArgs),
    /// Diagnostics table plus a regime strip chart.
    Report {
        snapshots: String,
        params: PathBuf,
        out_dir: PathBuf,
        #[command(flatten)]
        opts: DiagnoseArgs,
    },
}

#[derive(Debug, Clone, Copy, Args, serde::Serialize)]
pub struct DiagnoseArgs {
    /// Onset threshold on the relative H1 indicator.
    #[arg(long, default_value_t = 0.5)]
    pub theta: f64,
    /// Relative tolerance for the critical set.
    #[arg(long, default_value_t = 1e-6)]
    pub critical_tol: f64,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("source").required(true).args(["csv", "synth"]))]
pub struct FitArgs {
    /// Sweep CSV with `re` and `tau_trans` columns.
    pub csv: Option<PathBuf>,
    /// Generate tau = k1/Re with log-normal noise instead of reading a CSV.
    #[arg(long)]
    pub synth: bool,
    #[arg(long, default_value_t = 1.45, requires = "synth")]
    pub k1: f64,
    /// Relative noise level of the synthetic data.
    #[arg(long, default_value_t = 0.01, requires = "synth")]
    pub noise: f64,
    #[arg(long, default_value_t = 20, requires = "synth")]
    pub points: usize,
    #[arg(long, default_value_t = 1.0, requires = "synth")]
    pub re_min: f64,
    #[arg(long, default_value_t = 1e5, requires = "synth")]
    pub re_max: f64,
}

/// Flags shared by every subcommand.
pub struct Global {
    pub seed: Option<u64>,
    pub no_timestamp: bool,
    pub quiet: bool,
}

impl Global {
    pub fn timestamp(&self) -> Option<String> {
        (!self.no_timestamp).then(manifest::now)
    }

    pub fn progress(&self, msg: impl std::fmt::Display) {
        if !self.quiet {
            eprintln!("{msg}");
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: --jobs: {e}");
            return ExitCode::from(2);
        }
    }
    let global = Global { seed: cli.seed, no_timestamp: cli.no_timestamp, quiet: cli.quiet };
    let result = match cli.command {
        Command::Simulate { config, out_dir } => commands::simulate(&config, &out_dir, &global),
        Command::Diagnose { snapshots, params, out, opts } => {
            commands::diagnose(&snapshots, &params, out.as_deref(), opts, &global)
        }
        Command::Sweep { config, out_dir } => commands::sweep(&config, &out_dir, &global),
        Command::Fit(args) => commands::fit(&args, &global),
        Command::Report { snapshots, params, out_dir, opts } => {
            commands::report(&snapshots, &params, &out_dir, opts, &global)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {:#}", e.error);
            ExitCode::from(e.code)
        }
    }
}
