#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod source;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use commands::CliError;

/// Loopy belief propagation experiments: bounds, convergence certificates, runs, fixed points
/// and accuracy intervals. Output is CSV on stdout unless `--output` is given.
#[derive(Parser, Debug)]
#[command(name = "lbp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
#[group(required = true, multiple = false)]
pub struct GraphSource {
    /// Named generator: complete:N, k4minus, grid:RxC, torus:RxC, cycle:N, chain:N, star:N, tree:P1,P2,...
    #[arg(long)]
    pub generate: Option<String>,
    /// Graph file (nodes / card / node / edge lines).
    #[arg(long)]
    pub graph: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Distance bounds between fixed points across an η sweep.
    Bounds {
        #[command(flatten)]
        source: GraphSource,
        /// η value or start:stop:step range (generated graphs only).
        #[arg(long)]
        eta: Option<String>,
        /// Comma-separated subset of udb, improved-udb, ihler-udb, nudb, improved-nudb, ihler-nudb, true.
        #[arg(long, default_value = "udb,improved-udb,ihler-udb,nudb,improved-nudb,ihler-nudb,true")]
        methods: String,
        /// Iterations of the non-uniform bounds (default: 2 × node count).
        #[arg(long)]
        iterations: Option<usize>,
        /// Random starts used to find distinct fixed points.
        #[arg(long, default_value_t = 20)]
        seeds: u64,
        #[arg(long, default_value_t = 5000)]
        max_iters: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Convergence certificates and critical η values.
    Converge {
        #[command(flatten)]
        source: GraphSource,
        #[arg(long)]
        eta: Option<String>,
        /// uniform, ihler-uniform, nonuniform-bethe[:N], nonuniform-saw, walksum (repeatable; default all).
        #[arg(long)]
        condition: Vec<String>,
        /// Walk length for nonuniform-bethe (default: 2 × node count).
        #[arg(long)]
        depth: Option<usize>,
        /// Print the critical η of each condition instead of verdicts (generated graphs only).
        #[arg(long)]
        critical: bool,
        /// Check the implication chain between certificates at every η and list violations.
        #[arg(long)]
        ordering: bool,
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run sum-product and print beliefs.
    Run {
        #[command(flatten)]
        source: GraphSource,
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long, value_enum, default_value_t = Schedule::Sync)]
        schedule: Schedule,
        /// Random initial messages from this seed (default: uniform messages).
        #[arg(long)]
        seed: Option<u64>,
        /// Sweeps (sync) or single-message updates (residual).
        #[arg(long, default_value_t = 5000)]
        max_iters: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Write the residual schedule trace as CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Fixed points of completely uniform binary graphs.
    FixedPoints {
        /// η value or start:stop:step range.
        #[arg(long)]
        eta: String,
        /// Node degree; incoming count is degree − 1.
        #[arg(long, conflicts_with = "k")]
        degree: Option<usize>,
        /// Incoming messages per update.
        #[arg(long)]
        k: Option<usize>,
        /// Dump the error-variation curve for this fixed-point product instead.
        #[arg(long)]
        curve: Option<f64>,
        #[arg(long, default_value_t = 200)]
        points: usize,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Accuracy intervals around converged beliefs, with exact marginals when enumerable.
    Accuracy {
        #[command(flatten)]
        source: GraphSource,
        #[arg(long)]
        eta: Option<f64>,
        /// Restrict to one node.
        #[arg(long)]
        node: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 5000)]
        max_iters: usize,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Schedule {
    Sync,
    Residual,
}

fn configure_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("LBP_THREADS") {
        let n: usize = v.parse().map_err(|_| CliError::Usage(format!("LBP_THREADS must be a positive integer, got '{v}'")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot configure threads: {e}")))?;
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    match cli.command {
        Command::Bounds { source, eta, methods, iterations, seeds, max_iters, tol, output } => {
            let out = commands::bounds(&source, eta.as_deref(), &methods, iterations, seeds, max_iters, tol)?;
            commands::emit(output.as_deref(), &out)
        }
        Command::Converge { source, eta, condition, depth, critical, ordering, tol, output } => {
            let out = commands::converge(&source, eta.as_deref(), &condition, depth, critical, ordering, tol)?;
            commands::emit(output.as_deref(), &out)
        }
        Command::Run { source, eta, schedule, seed, max_iters, tol, trace, output } => {
            let (out, trace_csv) = commands::run(&source, eta, schedule, seed, max_iters, tol)?;
            if let (Some(path), Some(csv)) = (trace.as_deref(), trace_csv) {
                commands::emit(Some(path), &csv)?;
            } else if trace.is_some() {
                return Err(CliError::Usage("--trace needs --schedule residual".into()));
            }
            commands::emit(output.as_deref(), &out)
        }
        Command::FixedPoints { eta, degree, k, curve, points, output } => {
            let out = commands::fixed_points(&eta, degree, k, curve, points)?;
            commands::emit(output.as_deref(), &out)
        }
        Command::Accuracy { source, eta, node, seed, max_iters, tol, output } => {
            let out = commands::accuracy(&source, eta, node, seed, max_iters, tol)?;
            commands::emit(output.as_deref(), &out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
