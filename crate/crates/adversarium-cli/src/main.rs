//! `adversarium`: batch front end to the query-complexity workbench.
//!
//! One process runs one command and prints one report. Exit codes: 2 for
//! parse and usage errors, 3 for infeasible or inconsistent inputs, 4 when a
//! simulation budget is exceeded.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use report::{CliError, Format};

#[derive(Parser, Debug)]
#[command(name = "adversarium", version, about = "Adversary bounds, span programs, learning graphs and their walks")]
struct Cli {
    /// Seed for every random choice; fixed seed gives byte-identical output.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Numerical tolerance for feasibility and span checks.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Adversary matrices.
    Adv {
        #[command(subcommand)]
        op: AdvCmd,
    },
    /// Dual adversary solutions.
    Dual {
        #[command(subcommand)]
        op: DualCmd,
    },
    /// Span programs.
    Span {
        #[command(subcommand)]
        op: SpanCmd,
    },
    /// Learning graphs and their dual certificates.
    Lg {
        #[command(subcommand)]
        op: LgCmd,
    },
    /// Electrical networks and electric walks.
    Walk {
        #[command(subcommand)]
        op: WalkCmd,
    },
    /// Certificates of a function.
    Cert {
        #[command(subcommand)]
        op: CertCmd,
    },
}

/// Numeric parameters shared by named functions and built-in constructions.
#[derive(Args, Debug, Clone, Default)]
pub struct Params {
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub q: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub r: Option<usize>,
    #[arg(long)]
    pub r1: Option<usize>,
    #[arg(long)]
    pub r2: Option<usize>,
    #[arg(long)]
    pub l: Option<usize>,
    #[arg(long)]
    pub vertices: Option<usize>,
}

/// A function given by name and parameters, or as a JSON/CSV table.
#[derive(Args, Debug, Clone, Default)]
pub struct FunctionArgs {
    /// threshold, or, and, parity, ambainis, ed, k-distinctness, k-sum,
    /// collision, set-equality, promise-threshold, triangle, graph-collision
    #[arg(long)]
    pub function: Option<String>,
    /// Truth table (`.json` or `.csv`).
    #[arg(long)]
    pub table: Option<PathBuf>,
    /// Adjacency-matrix file for graph-valued parameters.
    #[arg(long)]
    pub adjacency: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum AdvCmd {
    /// ‖Γ‖, per-variable ‖Γ∘Δ_j‖ and their ratio.
    Ratio {
        #[command(flatten)]
        func: FunctionArgs,
        #[command(flatten)]
        params: Params,
        /// relation (Hamming-1 pairs) or weights (Ambainis Γ).
        #[arg(long)]
        construction: Option<String>,
        /// Four comma-separated Ambainis weights.
        #[arg(long)]
        weights: Option<String>,
        /// Adversary matrix JSON.
        #[arg(long)]
        matrix: Option<PathBuf>,
        /// Include Γ in the report.
        #[arg(long)]
        emit_matrix: bool,
    },
}

#[derive(Subcommand, Debug)]
enum DualCmd {
    /// Feasibility residual and objective of a dual solution.
    Check {
        /// Solution JSON; needs the function it was built for.
        path: Option<PathBuf>,
        /// Built-in solution: threshold or maj3.
        #[arg(long)]
        builtin: Option<String>,
        #[command(flatten)]
        func: FunctionArgs,
        #[command(flatten)]
        params: Params,
    },
}

/// A span program from a file or a built-in family.
#[derive(Args, Debug, Clone)]
pub struct ProgramArgs {
    #[arg(long)]
    pub program: Option<PathBuf>,
    /// or or st-conn.
    #[arg(long)]
    pub builtin: Option<String>,
    /// Source vertex for st-conn.
    #[arg(long)]
    pub s: Option<usize>,
    /// Sink vertex for st-conn.
    #[arg(long)]
    pub t: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum SpanCmd {
    /// Whether the program accepts an input, with the span residual.
    Eval {
        #[command(flatten)]
        prog: ProgramArgs,
        #[command(flatten)]
        params: Params,
        /// Input string (`0110` or comma-separated symbols).
        #[arg(long)]
        input: Option<String>,
        /// Graph whose edge bits are the input.
        #[arg(long)]
        graph: Option<PathBuf>,
    },
    /// Positive and negative witness sizes over a function's domain.
    Wsize {
        #[command(flatten)]
        prog: ProgramArgs,
        #[command(flatten)]
        params: Params,
        #[command(flatten)]
        func: FunctionArgs,
    },
    /// Runs the phase-detection algorithm on one input.
    Simulate {
        #[command(flatten)]
        prog: ProgramArgs,
        #[command(flatten)]
        params: Params,
        #[command(flatten)]
        func: FunctionArgs,
        #[arg(long)]
        input: Option<String>,
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        runs: usize,
    },
}

/// A learning graph with its flow, from a file or a built-in construction.
#[derive(Args, Debug, Clone)]
pub struct LgArgs {
    /// JSON `{graph, flow}`.
    #[arg(long)]
    pub lg: Option<PathBuf>,
    /// trivial, or, ksubset, collision or triangle.
    #[arg(long)]
    pub builtin: Option<String>,
}

#[derive(Subcommand, Debug)]
enum LgCmd {
    /// Negative, positive and total complexity.
    Complexity {
        #[command(flatten)]
        lg: LgArgs,
        #[command(flatten)]
        params: Params,
    },
    /// Objective and worst constraint of a dual certificate.
    DualCheck {
        /// ksubset, or, trivial, collision, set-equality, hidden-shift, triangle.
        #[arg(long)]
        cert: String,
        /// `builtin` or a JSON file of `[set, member, value]` triples.
        #[arg(long, default_value = "builtin")]
        alpha: String,
        #[command(flatten)]
        params: Params,
    },
    /// Runs the learning graph as an electric walk.
    Simulate {
        #[command(flatten)]
        lg: LgArgs,
        #[command(flatten)]
        params: Params,
        #[command(flatten)]
        func: FunctionArgs,
        /// One input; every domain input when omitted.
        #[arg(long)]
        input: Option<String>,
        #[arg(long, default_value_t = 1)]
        runs: usize,
    },
}

/// A weighted graph with an initial distribution and a marked set.
#[derive(Args, Debug, Clone)]
pub struct NetworkArgs {
    /// Edge list of `u v w` lines.
    #[arg(long)]
    pub graph: PathBuf,
    /// JSON array with the initial distribution σ.
    #[arg(long)]
    pub sigma: Option<PathBuf>,
    /// JSON array of marked vertices.
    #[arg(long)]
    pub marked: Option<PathBuf>,
    /// Point mass σ on this vertex.
    #[arg(long)]
    pub s: Option<usize>,
    /// Mark these vertices (comma-separated).
    #[arg(long)]
    pub t: Option<String>,
}

#[derive(Subcommand, Debug)]
enum WalkCmd {
    /// Effective resistance R_{σ,M} and the unit flow achieving it.
    Resistance {
        #[command(flatten)]
        net: NetworkArgs,
    },
    /// Hitting time H_{σ,M} of the random walk, next to 2·W·R_{σ,M}; the two
    /// agree when σ is the stationary distribution.
    Hitting {
        #[command(flatten)]
        net: NetworkArgs,
    },
    /// Commute time between s and t next to 2·W·R_{s,t}.
    Commute {
        #[command(flatten)]
        net: NetworkArgs,
    },
    /// Runs the electric quantum walk, on the bipartite double if σ cannot
    /// be placed on one side.
    Run {
        #[command(flatten)]
        net: NetworkArgs,
        /// Resistance bound R; defaults to R_{σ,M} of this instance.
        #[arg(long)]
        r_bound: Option<f64>,
        #[arg(long, default_value_t = 1)]
        runs: usize,
    },
}

#[derive(Subcommand, Debug)]
enum CertCmd {
    /// Smallest certificate of an input, or the certificate complexities.
    Extract {
        #[command(flatten)]
        func: FunctionArgs,
        #[command(flatten)]
        params: Params,
        #[arg(long)]
        input: Option<String>,
    },
}

fn run(cli: &Cli) -> Result<commands::Done, CliError> {
    let ctx = commands::Ctx { seed: cli.seed, tol: cli.tol };
    match &cli.cmd {
        Cmd::Adv { op: AdvCmd::Ratio { func, params, construction, weights, matrix, emit_matrix } } => {
            commands::adv_ratio(&ctx, func, params, construction.as_deref(), weights.as_deref(), matrix.as_deref(), *emit_matrix)
        }
        Cmd::Dual { op: DualCmd::Check { path, builtin, func, params } } => {
            commands::dual_check(&ctx, path.as_deref(), builtin.as_deref(), func, params)
        }
        Cmd::Span { op } => match op {
            SpanCmd::Eval { prog, params, input, graph } => commands::span_eval(&ctx, prog, params, input.as_deref(), graph.as_deref()),
            SpanCmd::Wsize { prog, params, func } => commands::span_wsize(&ctx, prog, params, func),
            SpanCmd::Simulate { prog, params, func, input, graph, runs } => {
                commands::span_simulate(&ctx, prog, params, func, input.as_deref(), graph.as_deref(), *runs)
            }
        },
        Cmd::Lg { op } => match op {
            LgCmd::Complexity { lg, params } => commands::lg_complexity(&ctx, lg, params),
            LgCmd::DualCheck { cert, alpha, params } => commands::lg_dual_check(&ctx, cert, alpha, params),
            LgCmd::Simulate { lg, params, func, input, runs } => commands::lg_simulate(&ctx, lg, params, func, input.as_deref(), *runs),
        },
        Cmd::Walk { op } => match op {
            WalkCmd::Resistance { net } => commands::walk_resistance(&ctx, net),
            WalkCmd::Hitting { net } => commands::walk_hitting(&ctx, net),
            WalkCmd::Commute { net } => commands::walk_commute(&ctx, net),
            WalkCmd::Run { net, r_bound, runs } => commands::walk_run(&ctx, net, *r_bound, *runs),
        },
        Cmd::Cert { op: CertCmd::Extract { func, params, input } } => commands::cert_extract(&ctx, func, params, input.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli).and_then(|done| {
        done.report.emit(cli.format, cli.tol, cli.seed, cli.out.as_deref())?;
        done.status.map_or(Ok(()), Err)
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("adversarium: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
