//! `tiltlab`: Monte Carlo and exact computations for tilted percolation
//! susceptibilities on nonunimodular transitive graphs.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "tiltlab", version, about = "Tilted percolation on nonunimodular graphs")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// Graph model, e.g. `fixed-end-tree:k=4`, `tree-x-lattice:k=4,d=1`.
    #[arg(long, global = true)]
    pub model: Option<String>,
    /// Edge probability, either one value or `orbit=value,...`.
    #[arg(long, global = true)]
    pub p: Option<String>,
    /// Tilt exponent (a comma-separated list for `chi`).
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub lambda: Option<String>,
    /// Ghost field strength.
    #[arg(long, global = true)]
    pub h: Option<f64>,
    #[arg(long, global = true)]
    pub samples: Option<u64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (falls back to TILTLAB_THREADS, then all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true)]
    pub budget_vertices: Option<u32>,
    #[arg(long, global = true)]
    pub budget_height: Option<i32>,
    /// Layer band `lo:hi`; `-inf` and `+inf` are allowed.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub slab: Option<String>,
    /// Output directory (default `tiltlab-out`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// TOML file with the same keys as the long flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ProbeArgs {
    /// Deepest layer `n` of the decay series.
    #[arg(long)]
    pub n_max: Option<i32>,
    /// Downward excursion depth: `auto` or an integer.
    #[arg(long)]
    pub depth: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run every exact identity suite.
    Verify,
    /// Tilted susceptibility.
    Chi,
    /// Upward slab-crossing decay rate.
    Alpha {
        #[arg(long)]
        n_max: Option<i32>,
    },
    /// Layer-count decay rate.
    Beta {
        #[command(flatten)]
        probe: ProbeArgs,
        /// Also estimate the downward series.
        #[arg(long)]
        downward: bool,
    },
    /// Triangle diagram at the origin.
    Triangle,
    /// Ghost-field magnetization and its field derivative.
    Magnetization {
        #[arg(long)]
        delta: Option<f64>,
    },
    /// Cluster size and radius tails.
    Tail {
        #[arg(long)]
        thresholds: Option<String>,
        /// Vertex-count window `lo:hi` for the log-log slope.
        #[arg(long)]
        slope_window: Option<String>,
    },
    /// Probability that the origin is the peak of its cluster.
    Peak {
        #[arg(long)]
        k_max: Option<i32>,
    },
    /// Phase classification over an anisotropic probability grid.
    Sweep {
        #[command(flatten)]
        probe: ProbeArgs,
        /// Tree-edge probabilities: `a,b,...` or `lo:hi:step`.
        #[arg(long)]
        p_tree: Option<String>,
        #[arg(long)]
        p_lattice: Option<String>,
        /// Classification margin in standard errors.
        #[arg(long)]
        margin: Option<f64>,
    },
    /// Bisection for the critical point at each tilt.
    Trace {
        #[command(flatten)]
        probe: ProbeArgs,
        #[arg(long, allow_hyphen_values = true)]
        lambdas: Option<String>,
        #[arg(long)]
        tolerance: Option<f64>,
        #[arg(long)]
        margin: Option<f64>,
    },
    /// Print an exact value with its error bound as JSON.
    Oracle {
        #[arg(value_enum)]
        kind: OracleKind,
        /// Tree degree for the fixed-end formulas.
        #[arg(long)]
        d: Option<u32>,
        /// Tree degree for the branching-process formulas.
        #[arg(long)]
        k: Option<u32>,
        /// Generation or size index.
        #[arg(long)]
        n: Option<u32>,
        /// Ball radius.
        #[arg(long)]
        radius: Option<u32>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OracleKind {
    FixedEndPcl,
    FixedEndAlpha,
    FixedEndChi,
    OrientedPcl,
    OrientedPt,
    OrientedAlpha,
    OrientedChi,
    OrientedChiSystem,
    GwExtinction,
    GwReach,
    GwSurvival,
    BallChi,
    BallTriangle,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match commands::run(cli, &args[1..]) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
