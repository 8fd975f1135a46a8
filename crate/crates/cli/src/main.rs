//! `bialg`: load bialgebras, differential tables and cochains, run exact
//! checks and computations, and print a deterministic report.
//!
//! Exit status: 0 when every check passes, 1 when a check fails or is not
//! computable, 2 on unreadable or invalid input.

mod commands;
mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use commands::Ctx;
use report::Report;

#[derive(Parser)]
#[command(name = "bialg", version, about = "Exact deformation theory of finite-dimensional bialgebras")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Subcommand, Clone, Copy, Debug)]
enum Command {
    /// Associativity, coassociativity and compatibility residuals.
    CheckBialgebra,
    /// Validate a differential table: ∂² = 0 and a byte-exact JSON round trip.
    TableCheck,
    /// d₁, d₂ and d_GS of each cochain, with the bicomplex identities.
    GsDiff,
    /// δ_B of each cochain, at --target or at every generator.
    DeltaB,
    /// Compare δ_B with d₁ and d₂ (random cochains from --seed if none given).
    CompareDiff,
    /// l_k of the given cochains.
    Bracket,
    /// Generalized Jacobi residuals of the given cochains.
    LinfCheck,
    /// Master-equation residual of κ (the single cochain).
    Master,
    /// Twist by κ (first cochain): curvature and l_n^κ of the remaining cochains.
    Twist,
    /// Contract a decorated graph with μ, Δ of --bialgebra (or zero maps of --dim).
    EvalGraph,
    /// A∞ residuals R_n of μ_n ∈ C^{n,1} (and an optional d ∈ C^{1,1}).
    AinfCheck,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Text,
}

fn parse_pair(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected m,n but got {s:?}"))?;
    let num = |x: &str| x.trim().parse::<usize>().map_err(|e| format!("{x:?}: {e}"));
    Ok((num(a)?, num(b)?))
}

#[derive(clap::Args, Debug)]
pub struct Opts {
    /// Bialgebra file {"dim", "mu", "delta"}.
    #[arg(long, global = true, value_name = "FILE")]
    bialgebra: Option<PathBuf>,
    /// Differential table file (default: built-in).
    #[arg(long, global = true, value_name = "FILE")]
    table: Option<PathBuf>,
    /// Cochain file {"components": [...]}; repeatable, order matters.
    #[arg(long, global = true, value_name = "FILE")]
    cochain: Vec<PathBuf>,
    /// Append a random cochain in C^{p,q} drawn from --seed; repeatable.
    #[arg(long, global = true, value_name = "P,Q", value_parser = parse_pair)]
    random: Vec<(usize, usize)>,
    /// Target generator biarity (outputs, inputs).
    #[arg(long, global = true, value_name = "M,N", value_parser = parse_pair)]
    target: Option<(usize, usize)>,
    /// Seed for random cochains.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Dimension when no bialgebra is given.
    #[arg(long, global = true)]
    dim: Option<usize>,
    /// Decorated graph file for eval-graph.
    #[arg(long, global = true, value_name = "FILE")]
    graph: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    out: Format,
    /// Include wall-clock time (makes the report run-dependent).
    #[arg(long, global = true)]
    timing: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let echo: Vec<String> = std::env::args().skip(1).collect();
    let name = format!("{:?}", cli.command);
    let name = kebab(&name);
    let mut ctx = Ctx::new(&cli.opts, Report::new(&name, echo));
    let start = Instant::now();
    let run = match cli.command {
        Command::CheckBialgebra => commands::check_bialgebra_cmd,
        Command::TableCheck => commands::table_check,
        Command::GsDiff => commands::gs_diff,
        Command::DeltaB => commands::delta_b,
        Command::CompareDiff => commands::compare_diff,
        Command::Bracket => commands::bracket,
        Command::LinfCheck => commands::linf_check,
        Command::Master => commands::master,
        Command::Twist => commands::twist_cmd,
        Command::EvalGraph => commands::eval_graph,
        Command::AinfCheck => commands::ainf_check,
    };
    if let Err(e) = run(&mut ctx) {
        eprintln!("error: {e:#}");
        return ExitCode::from(2);
    }
    let mut report = ctx.report;
    if cli.opts.timing {
        report.set_timing(start.elapsed().as_secs_f64() * 1e3);
    }
    let text = match cli.opts.out {
        Format::Json => serde_json::to_string_pretty(&report.to_json()).expect("reports serialize") + "\n",
        Format::Text => report.to_text(),
    };
    // A closed pipe (e.g. `| head`) is not an error worth reporting.
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn kebab(camel: &str) -> String {
    let mut out = String::new();
    for (i, c) in camel.chars().enumerate() {
        if c.is_uppercase() && i > 0 {
            out.push('-');
        }
        out.extend(c.to_lowercase());
    }
    out
}
