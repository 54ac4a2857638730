use std::path::PathBuf;
use std::process::ExitCode;

use affinity_cli::report::EXIT_INPUT;
use affinity_cli::{render, run, Command, Format, Overrides, ProblemConfig};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "affinity-dim",
    version,
    about = "Rigorous approximation of the affinity dimension of affine iterated function systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check multipositivity and contraction.
    Certify(Args),
    /// Bracket the dimension in (k, k+1) for each k.
    Bracket(Args),
    /// Compute the approximations s_n for n = 1..N.
    Solve(Args),
    /// Non-rigorous estimates from a discretized transfer operator (2×2 only).
    Discretize(Args),
    /// Dump t_n(s) and a_n(s).
    TraceTable(Args),
}

#[derive(clap::Args)]
struct Args {
    /// JSON problem description.
    #[arg(long)]
    config: PathBuf,
    /// Largest n.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    /// Working precision in bits.
    #[arg(long)]
    precision: Option<u32>,
    /// Secant tolerance, e.g. 1e-40.
    #[arg(long)]
    tol: Option<String>,
    /// Worker threads for trace sums and operator assembly.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    format: OutputFormat,
    /// Solve without certifying the hypotheses.
    #[arg(long)]
    no_certify: bool,
    /// Value of s for trace-table.
    #[arg(long, allow_hyphen_values = true)]
    s: Option<String>,
    /// Largest mesh size for discretize.
    #[arg(long)]
    mesh: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Text,
    Csv,
    Json,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Cmd::Certify(a) => (Command::Certify, a),
        Cmd::Bracket(a) => (Command::Bracket, a),
        Cmd::Solve(a) => (Command::Solve, a),
        Cmd::Discretize(a) => (Command::Discretize, a),
        Cmd::TraceTable(a) => (Command::TraceTable, a),
    };
    if let Some(t) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("cannot configure {t} threads: {e}");
            return ExitCode::from(EXIT_INPUT as u8);
        }
    }
    let config = match ProblemConfig::load(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INPUT as u8);
        }
    };
    let overrides = Overrides {
        n: args.n,
        k: args.k,
        precision: args.precision,
        tol: args.tol,
        no_certify: args.no_certify,
        s: args.s,
        mesh: args.mesh,
    };
    let doc = run(command, &config, &overrides);
    let format = match args.format {
        OutputFormat::Text => Format::Text,
        OutputFormat::Csv => Format::Csv,
        OutputFormat::Json => Format::Json,
    };
    print!("{}", render(&doc, format));
    ExitCode::from(doc.exit_code as u8)
}
