//! `heatbound`: batch driver over graph files.
//!
//! Every subcommand writes a CSV report (to `--out`, or stdout) and a JSON
//! summary (to `--summary`, or stdout when the CSV went to a file). Exit
//! status is 0 when every check passes, 1 when a verification failed and 2
//! on bad input, with a JSON error object on stderr.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

#[derive(Debug, Parser)]
#[command(name = "heatbound", version, about = "Heat kernels and Gaussian bounds on weighted graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Transition probabilities from one source over a time grid.
    Kernel {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: GridArgs,
        /// Source vertex id (default: first vertex).
        #[arg(long)]
        source: Option<String>,
    },
    /// Build the adapted metric and verify it.
    Metric {
        #[command(flatten)]
        common: Common,
    },
    /// Fit the regularity constant of an on-diagonal or tabulated profile.
    Regularity(RegularityArgs),
    /// Evaluate the off-diagonal bounds against computed kernels.
    Bounds(BoundsArgs),
    /// Test-function membership and J-monotonicity.
    Imp(ImpArgs),
    /// Monte Carlo estimate of the kernel at `--tmax`.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        source: Option<String>,
        /// Time at which the walk is observed.
        #[arg(long, default_value_t = 1.0)]
        tmax: f64,
        #[arg(long, default_value_t = 100_000)]
        paths: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10_000_000)]
        jump_cap: u64,
    },
}

#[derive(Debug, Args)]
struct Common {
    /// Graph file (line format, or JSON when the name ends in .json).
    #[arg(long)]
    graph: PathBuf,
    /// Edge-length overrides, lines `l <id1> <id2> <length>`.
    #[arg(long)]
    metric: Option<PathBuf>,
    /// CSV report path (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON summary path.
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Kernel truncation tolerance (l1).
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
}

#[derive(Debug, Args)]
struct GridArgs {
    #[arg(long, default_value_t = 0.01)]
    tmin: f64,
    #[arg(long, default_value_t = 100.0)]
    tmax: f64,
    #[arg(long, default_value_t = 50)]
    tcount: usize,
    /// `log` or `linear`.
    #[arg(long, default_value = "log")]
    tscale: String,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Convention {
    /// `β = ⌈log 2 / log γ⌉`.
    LogTwoOverLogGamma,
    /// `β = ⌈log γ / log 2⌉`.
    LogGammaOverLogTwo,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum EnvelopeKind {
    Exp,
    Stretched,
    Poly,
}

#[derive(Debug, Args)]
struct RegularityArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    grid: GridArgs,
    /// Vertex whose on-diagonal profile is fitted (default: first vertex).
    #[arg(long)]
    vertex: Option<String>,
    /// CSV of `t,f` pairs to fit instead of an on-diagonal profile.
    #[arg(long)]
    profile: Option<PathBuf>,
    #[arg(long, default_value_t = 2.0)]
    gamma: f64,
    #[arg(long, value_enum)]
    envelope: Option<EnvelopeKind>,
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
    #[arg(long, default_value_t = 0.5)]
    epsilon: f64,
    /// Envelope prefactor (default: the fitted constant).
    #[arg(long)]
    envelope_a: Option<f64>,
    #[arg(long, default_value_t = 512)]
    per_decade: usize,
    #[arg(long, value_enum, default_value = "log-two-over-log-gamma")]
    beta_convention: Convention,
}

#[derive(Debug, Args)]
struct BoundsArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    grid: GridArgs,
    /// First vertex (default: first vertex of the file).
    #[arg(long)]
    x1: Option<String>,
    /// Second vertex (default: last vertex of the file).
    #[arg(long)]
    x2: Option<String>,
    /// `all`, a tag such as `thm1.1`, `cor2.7`, or a comma list.
    #[arg(long, default_value = "all")]
    formula: String,
    /// `paper` or `empirical`.
    #[arg(long, default_value = "paper")]
    constants: String,
    #[arg(long, default_value_t = 2.0)]
    gamma: f64,
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
    #[arg(long, default_value_t = 0.5)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.0)]
    t1: f64,
    #[arg(long, default_value_t = f64::INFINITY)]
    t2: f64,
    #[arg(long, default_value_t = 64)]
    per_decade: usize,
    #[arg(long, value_enum, default_value = "log-two-over-log-gamma")]
    beta_convention: Convention,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FamilyKind {
    Lemma23,
    Drift,
    Gaussian,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum RhoKind {
    CappedDist,
    Reflected,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum EvolutionKind {
    Full,
    Killed,
}

#[derive(Debug, Args)]
struct ImpArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long)]
    origin: Option<String>,
    #[arg(long, value_enum, default_value = "lemma23")]
    family: FamilyKind,
    #[arg(long, value_enum, default_value = "capped-dist")]
    rho: RhoKind,
    /// Cap `R` of the weight (default: eccentricity of the origin).
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    tau: f64,
    /// Drift parameter in `[0, 1/4]`.
    #[arg(long, default_value_t = 0.25)]
    a: f64,
    /// Gaussian `D >= 5`.
    #[arg(long, default_value_t = 5.0)]
    gauss_d: f64,
    /// Gaussian `Δ` (default: `24R/D`).
    #[arg(long)]
    gauss_delta: Option<f64>,
    /// Gaussian horizon `s` (default: `--tmax`).
    #[arg(long)]
    gauss_s: Option<f64>,
    #[arg(long, value_enum, default_value = "full")]
    evolution: EvolutionKind,
    /// Killing domain is the open ball of this radius (default: `--radius`).
    #[arg(long)]
    domain_radius: Option<f64>,
}

/// Outcome of a subcommand that ran to completion.
pub enum Outcome {
    Pass,
    Fail,
}

fn configure_threads() -> Result<(), heatbound::Error> {
    if let Ok(v) = std::env::var("HEATBOUND_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| heatbound::Error::InvalidParameter(format!("HEATBOUND_THREADS={v} is not a count")))?;
        // a second initialisation (only possible in tests) keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn report_error(kind: &str, message: &str) -> ExitCode {
    eprintln!("{}", json!({ "error": kind, "message": message }));
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            return report_error("usage", e.to_string().trim());
        }
    };
    if let Err(e) = configure_threads() {
        return report_error(e.kind(), &e.to_string());
    }
    match commands::run(cli.command) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(e) => report_error(e.kind(), &e.to_string()),
    }
}
