use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pavi::cli::{run, CliError, Command, ConfigOverlay, RunConfig};
use pavi::{Family, PaviError};

#[derive(Parser)]
#[command(
    name = "pavi",
    version,
    about = "Estimate F- and G-measures of variable selections from data"
)]
struct Cli {
    /// JSON file with default settings; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Assess listed models and the CV-tuned selections on a dataset.
    Assess(Common),
    /// Replications of a simulation example.
    Simulate(Common),
    /// Simulation over a range of noise levels.
    Sweep(Common),
    /// Regularization path for one penalty.
    Paths(Common),
    /// AIC, BIC and deviance of listed models.
    Diagnostics(Common),
}

#[derive(Args, Default)]
struct Common {
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    response: Option<String>,
    #[arg(long)]
    family: Option<Family>,
    #[arg(long)]
    models: Option<PathBuf>,
    /// Skip the Lasso/adaptive Lasso/MCP/SCAD selections.
    #[arg(long)]
    no_selectors: bool,
    /// Comma-separated: arm, bicp.
    #[arg(long, value_delimiter = ',')]
    weighting: Option<Vec<String>>,
    #[arg(long)]
    psi: Option<f64>,
    #[arg(long)]
    splits: Option<usize>,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    diagnostics: bool,
    #[arg(long)]
    example: Option<u32>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    sigma: Option<f64>,
    /// "lo:hi:count" or a comma list.
    #[arg(long)]
    sigmas: Option<String>,
    /// lasso, adlasso, scad or mcp.
    #[arg(long)]
    penalty: Option<String>,
    #[arg(long)]
    gamma: Option<f64>,
}

impl Common {
    fn overlay(self) -> ConfigOverlay {
        ConfigOverlay {
            data: self.data,
            response: self.response,
            family: self.family,
            models: self.models,
            selectors: self.no_selectors.then_some(false),
            weighting: self.weighting,
            psi: self.psi,
            splits: self.splits,
            folds: self.folds,
            reps: self.reps,
            seed: self.seed,
            out: self.out,
            diagnostics: self.diagnostics.then_some(true),
            example: self.example,
            n: self.n,
            sigma: self.sigma,
            sigmas: self.sigmas,
            penalty: self.penalty,
            gamma: self.gamma,
        }
    }
}

fn init_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("PAVI_THREADS") else {
        return Ok(());
    };
    let threads: usize = v.trim().parse().ok().filter(|&t| t > 0).ok_or_else(|| CliError {
        error: PaviError::InvalidConfig(format!("must be a positive integer, got '{v}'")),
        context: "PAVI_THREADS".into(),
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError {
            error: PaviError::InvalidConfig(e.to_string()),
            context: "PAVI_THREADS".into(),
        })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Sub::Assess(a) => (Command::Assess, a),
        Sub::Simulate(a) => (Command::Simulate, a),
        Sub::Sweep(a) => (Command::Sweep, a),
        Sub::Paths(a) => (Command::Paths, a),
        Sub::Diagnostics(a) => (Command::Diagnostics, a),
    };
    let result = init_threads().and_then(|()| {
        let overlay = args.overlay();
        overlay.check().map_err(|e| CliError {
            error: e,
            context: "--penalty".into(),
        })?;
        let cfg = RunConfig::resolve(command, cli.config.as_deref(), &overlay).map_err(|e| CliError {
            error: e,
            context: "configuration".into(),
        })?;
        run(&cfg)
    });
    match result {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::FAILURE
        }
    }
}
