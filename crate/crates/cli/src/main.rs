//! Command line front end: reads a JSON problem file, runs one command and
//! prints a JSON report on standard output.

mod commands;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "ivmonoid", version, about = "Monoids of integer-valued polynomials")]
struct Cli {
    /// Log progress to standard error.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Factor the polynomial over the rationals.
    Factor(Common),
    /// Finite dense subset of S relative to the factors of f.
    DenseSet(Common),
    /// Whether `point` lies in the closure of `points`.
    Closure(Common),
    /// Whether `points` is dense in S.
    IsDense(Common),
    /// Valuation of the fixed divisor of `g` (default f).
    FixedDivisor(Common),
    /// Membership of `g` in the monoid generated by f, with certificate.
    Member(Common),
    /// Divisibility of `b` by `a` inside the monoid.
    Divides(Common),
    /// Image of `g` under the divisor homomorphism.
    Phi(Common),
    /// Divisor-theory witnesses and gcd identities.
    Witnesses(Common),
    /// Primes contributing coordinates to the global map.
    CriticalPrimes(Common),
    /// Check the divisor-homomorphism property on samples, or run the
    /// acceptance suite.
    Verify(VerifyArgs),
}

/// Problem file plus overrides. Every flag replaces the matching file field.
#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// JSON problem file.
    pub problem: Option<PathBuf>,
    /// The polynomial f as JSON (coefficient array or factored object).
    #[arg(long = "poly")]
    pub polynomial: Option<String>,
    /// The set S as JSON, e.g. '{"set":"integers"}'.
    #[arg(long)]
    pub set: Option<String>,
    /// A prime or "global".
    #[arg(long)]
    pub scope: Option<String>,
    #[arg(long)]
    pub g: Option<String>,
    #[arg(long)]
    pub a: Option<String>,
    #[arg(long)]
    pub b: Option<String>,
    #[arg(long)]
    pub point: Option<String>,
    /// Comma separated rationals.
    #[arg(long, value_delimiter = ',')]
    pub points: Option<Vec<String>>,
    #[arg(long)]
    pub depth_bound: Option<u32>,
    #[arg(long)]
    pub witness_bound: Option<u32>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub oracle_radius: Option<u64>,
    #[arg(long)]
    pub m_max: Option<u32>,
}

#[derive(Args, Debug, Clone)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: Common,
    /// Run acceptance criteria instead: "all" or a comma separated list.
    #[arg(long)]
    pub suite: Option<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.verbose { "debug" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .target(env_logger::Target::Stderr)
        .init();
    let (name, outcome) = match &cli.command {
        Command::Factor(c) => ("factor", commands::run("factor", c)),
        Command::DenseSet(c) => ("dense-set", commands::run("dense-set", c)),
        Command::Closure(c) => ("closure", commands::run("closure", c)),
        Command::IsDense(c) => ("is-dense", commands::run("is-dense", c)),
        Command::FixedDivisor(c) => ("fixed-divisor", commands::run("fixed-divisor", c)),
        Command::Member(c) => ("member", commands::run("member", c)),
        Command::Divides(c) => ("divides", commands::run("divides", c)),
        Command::Phi(c) => ("phi", commands::run("phi", c)),
        Command::Witnesses(c) => ("witnesses", commands::run("witnesses", c)),
        Command::CriticalPrimes(c) => ("critical-primes", commands::run("critical-primes", c)),
        Command::Verify(v) => match &v.suite {
            Some(which) => ("verify", commands::run_suite(which, &v.common)),
            None => ("verify", commands::run("verify", &v.common)),
        },
    };
    let (report, code) = commands::envelope(name, outcome);
    let text = serde_json::to_string_pretty(&report).expect("report serializes");
    // A closed pipe on the reader's side is not an error of ours.
    let _ = writeln!(std::io::stdout(), "{text}");
    ExitCode::from(code)
}
