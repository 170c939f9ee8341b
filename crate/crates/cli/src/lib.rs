//! Deterministic parameter sweeps over the exact impurity-lattice solvers.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use config::{Command, ElementKind, FileConfig, ModelKind, Overrides, SweepConfig};
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "nhse", version, about = "Exact spectra, critical impurity strengths and winding response of impurity lattices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Sub,

    /// Lattice: hn (Hatano-Nelson) or ssh (non-reciprocal SSH).
    #[arg(long, global = true, value_enum)]
    pub model: Option<ModelKind>,

    /// Sites (HN) or unit cells (SSH).
    #[arg(long, global = true)]
    pub n: Option<usize>,

    /// Non-reciprocity g.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub g: Option<f64>,

    /// Inter-cell hopping t' (SSH); a grid spec for gap-scan.
    #[arg(long = "t-prime", global = true, allow_hyphen_values = true)]
    pub t_prime: Option<String>,

    /// Impurity strength: a value or "log:start:stop:count" / "lin:start:stop:count".
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub v0: Option<String>,

    /// Reference energy "re,im".
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub er: Option<String>,

    /// Green's-function element used by nu-sweep.
    #[arg(long, global = true, value_enum)]
    pub element: Option<ElementKind>,

    /// Initial k-point count for the winding number.
    #[arg(long = "n-k", global = true)]
    pub n_k: Option<usize>,

    /// Output file (default: stdout).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Worker threads (0 = all cores). Does not affect the output.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// JSON configuration; command-line flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Sub {
    /// Exact and dense-oracle spectrum at one impurity strength (CSV).
    Spectrum,
    /// Mean IPR and realness along a V0 grid (CSV).
    IprSweep,
    /// Closed-form, exact and oracle critical impurity strengths (JSON).
    Critical,
    /// Smallest band |E| along a t' grid, SSH only (CSV).
    GapScan,
    /// PBC spectral winding number around E_r (JSON).
    Winding,
    /// Logarithmic Green's-function response along a V0 grid (CSV).
    NuSweep,
    /// Eigenvalue trajectories from V0 = 0 along a grid (CSV).
    Flow,
    /// Exact-vs-oracle suite over the default parameter matrix (JSON).
    Validate,
}

impl From<Sub> for Command {
    fn from(s: Sub) -> Self {
        match s {
            Sub::Spectrum => Command::Spectrum,
            Sub::IprSweep => Command::IprSweep,
            Sub::Critical => Command::Critical,
            Sub::GapScan => Command::GapScan,
            Sub::Winding => Command::Winding,
            Sub::NuSweep => Command::NuSweep,
            Sub::Flow => Command::Flow,
            Sub::Validate => Command::Validate,
        }
    }
}

impl Cli {
    pub fn resolve(&self) -> Result<SweepConfig, CliError> {
        let file = match &self.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let over = Overrides {
            model: self.model,
            n: self.n,
            g: self.g,
            t_prime: self.t_prime.clone(),
            v0: self.v0.clone(),
            er: self.er.clone(),
            element: self.element,
            n_k: self.n_k,
            threads: self.threads,
        };
        SweepConfig::resolve(self.command.into(), file, over)
    }
}

/// Resolves the configuration, runs the command on a pool of the requested
/// size and writes the rendered output. Returns whether built-in checks
/// passed.
pub fn execute(cli: &Cli) -> Result<bool, CliError> {
    let cfg = cli.resolve()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| CliError::Numerical(format!("cannot start thread pool: {e}")))?;
    let report = pool.install(|| commands::run(&cfg))?;
    let text = report.render(&cfg);
    match &cli.out {
        Some(path) => std::fs::write(path, text)?,
        None => {
            use std::io::Write;
            std::io::stdout().lock().write_all(text.as_bytes())?;
        }
    }
    Ok(report.passed)
}
