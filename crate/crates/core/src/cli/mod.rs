//! Command-line front end: parameter sweeps written as CSV or JSON tables.
//!
//! Exit codes: 0 on success, 2 for invalid configuration, 3 for numerical
//! failure. Rows follow grid order whatever the worker count, which is
//! taken from `NONGAUSS_WORKERS` (default: all cores).

mod commands;
mod grid;
mod table;

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};

pub use commands::{cmd_derivatives, cmd_kalman, cmd_mc_check, cmd_scalar, cmd_tones, run};
pub use grid::{parse_n_list, parse_q_grid};
pub use table::{format_real, Cell, Format, Table};

pub const WORKERS_ENV: &str = "NONGAUSS_WORKERS";

#[derive(Debug, Parser)]
#[command(
    name = "nongauss",
    version,
    about = "Non-Gaussianity and MMSE of Gaussian channel outputs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Input law (rademacher, gaussian, uniform, expstd, mix:w,mu1,sd1,mu2,sd2,
    /// atoms:x:p,...; `all` for the registry). Tones take an amplitude law:
    /// unit, gaussian-pair or random:<law>.
    #[arg(long)]
    source: Option<String>,
    /// start:stop:count[:log], or a comma list
    #[arg(long = "q-grid")]
    q_grid: Option<String>,
    /// Comma list of tone counts
    #[arg(long = "n-list")]
    n_list: Option<String>,
    /// Relative tolerance: quadrature for scalar (absolute floor tol/1000),
    /// Richardson extrapolation for derivatives
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output file (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or json
    #[arg(long, default_value = "csv")]
    format: String,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// MMSE, its cubic expansion and D(q) of the scalar channel
    Scalar(Common),
    /// Derivatives of D at zero against the moment formula
    Derivatives(Common),
    /// Exact and asymptotic CMMSE/MMSE of the N-tone channel
    Tones(Common),
    /// Riccati recursion for Gaussian tones under dt halving
    Kalman {
        #[command(flatten)]
        common: Common,
        /// Time steps of the coarsest level
        #[arg(long, default_value_t = 1024)]
        steps: usize,
        /// Number of dt halvings (at least 2)
        #[arg(long, default_value_t = 3)]
        levels: usize,
    },
    /// Monte Carlo MMSE against quadrature
    McCheck {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        /// Proportional allocation over atoms (discrete laws only)
        #[arg(long)]
        stratified: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Scalar,
    Derivatives,
    Tones,
    Kalman,
    McCheck,
}

/// A fully resolved invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: CommandKind,
    pub source: String,
    pub q_grid: Vec<f64>,
    pub n_list: Vec<usize>,
    pub tol: Option<f64>,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub steps: usize,
    pub levels: usize,
    pub samples: usize,
    pub stratified: bool,
}

impl RunConfig {
    /// Parses arguments (including the program name).
    pub fn from_args<I, T>(args: I) -> std::result::Result<Self, clap::Error>
    where
        I: IntoIterator<Item = T>,
        T: Into<OsString> + Clone,
    {
        let cli = Cli::try_parse_from(args)?;
        Self::resolve(cli.command).map_err(|e| {
            clap::Error::raw(clap::error::ErrorKind::ValueValidation, format!("{e}\n"))
        })
    }

    fn resolve(command: Command) -> Result<Self> {
        let (kind, common, steps, levels, samples, stratified) = match command {
            Command::Scalar(c) => (CommandKind::Scalar, c, 0, 0, 0, false),
            Command::Derivatives(c) => (CommandKind::Derivatives, c, 0, 0, 0, false),
            Command::Tones(c) => (CommandKind::Tones, c, 0, 0, 0, false),
            Command::Kalman {
                common,
                steps,
                levels,
            } => (CommandKind::Kalman, common, steps, levels, 0, false),
            Command::McCheck {
                common,
                samples,
                stratified,
            } => (CommandKind::McCheck, common, 0, 0, samples, stratified),
        };
        let (source, q_grid, n_list) = match kind {
            CommandKind::Scalar => ("rademacher", "1e-3:1:13:log", "1"),
            CommandKind::Derivatives => ("rademacher", "0", "1"),
            CommandKind::Tones => ("unit", "1", "1,2,4,8,16,32,64"),
            CommandKind::Kalman => ("gaussian-pair", "2", "1,2,4"),
            CommandKind::McCheck => ("all", "0.5,2", "1"),
        };
        if let Some(t) = common.tol {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::invalid(format!(
                    "tolerance must be positive, got {t}"
                )));
            }
        }
        Ok(Self {
            command: kind,
            source: common.source.unwrap_or_else(|| source.to_string()),
            q_grid: parse_q_grid(common.q_grid.as_deref().unwrap_or(q_grid))?,
            n_list: parse_n_list(common.n_list.as_deref().unwrap_or(n_list))?,
            tol: common.tol,
            seed: common.seed,
            out: common.out,
            format: common.format.parse()?,
            steps,
            levels,
            samples,
            stratified,
        })
    }
}

fn worker_count() -> Result<Option<usize>> {
    match std::env::var(WORKERS_ENV) {
        Err(_) => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::invalid(format!(
                "{WORKERS_ENV} must be a positive integer, got '{s}'"
            ))),
        },
    }
}

/// Runs `cfg` on a pool sized by `NONGAUSS_WORKERS` and writes the table.
pub fn execute(cfg: &RunConfig) -> Result<()> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = worker_count()? {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::invalid(format!("worker pool: {e}")))?;
    let table = pool.install(|| run(cfg))?;
    let io_err = |e: std::io::Error| Error::invalid(format!("writing output: {e}"));
    match &cfg.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path).map_err(io_err)?);
            table.write(cfg.format, &mut w).map_err(io_err)?;
            w.flush().map_err(io_err)
        }
        None => table
            .write(cfg.format, std::io::stdout().lock())
            .map_err(io_err),
    }
}

/// Entry point for the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cfg = match RunConfig::from_args(args) {
        Ok(cfg) => cfg,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cfg) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numerical() {
                3
            } else {
                2
            }
        }
    }
}
