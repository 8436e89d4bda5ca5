//! `rhcsvm`: train, evaluate and compare hierarchical and weighted-sum
//! multiclass SVMs on delimited-text data.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::SolverChoice;

#[derive(Debug, Parser)]
#[command(name = "rhcsvm", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Overrides applied on top of the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// Output directory (overrides `out` in the config).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub solver: Option<SolverChoice>,
    /// Weight `C` of the baseline.
    #[arg(long = "c-value")]
    pub c_value: Option<f64>,
    /// Radius of the parameter ball of the hierarchical solver.
    #[arg(long)]
    pub rho1: Option<f64>,
    #[arg(long = "max-iters")]
    pub max_iters: Option<usize>,
    /// Stopping tolerance (T-residual for rhc, primal-dual change for ncr).
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Load the dataset, extract and certify the subset, write it out.
    PrepareData {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Train one solver; writes model.toml, report.toml and history.csv.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Evaluate a trained model on the configured dataset.
    Evaluate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Tabulate hinge loss, risk count and margins of two models.
    Compare {
        #[arg(long)]
        config: PathBuf,
        /// Exactly two model files.
        #[arg(long, num_args = 2, required = true)]
        models: Vec<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Write decision and unit-level boundary lines plus samples (N = 2).
    EmitBoundaries {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run both solvers on every configured experiment and tabulate the
    /// results in one summary table.
    ReproducePaper {
        #[arg(long, default_value = "configs/paper.toml")]
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::PrepareData { config, overrides } => commands::prepare_data(&config, &overrides),
        Command::Train { config, overrides } => commands::train(&config, &overrides),
        Command::Evaluate {
            config,
            model,
            overrides,
        } => commands::evaluate(&config, &model, &overrides),
        Command::Compare {
            config,
            models,
            overrides,
        } => commands::compare(&config, &models[0], &models[1], &overrides),
        Command::EmitBoundaries {
            config,
            model,
            overrides,
        } => commands::emit_boundaries(&config, &model, &overrides),
        Command::ReproducePaper { config, overrides } => {
            commands::reproduce_paper(&config, &overrides)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rhcsvm: {e}");
            e.exit_code()
        }
    }
}
