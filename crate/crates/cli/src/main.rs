mod commands;
mod output;

use clap::{Args, Parser, Subcommand};
use output::{canonical, Format, RunManifest, Sink};
use restricta::DigitSystem;
use std::io::{self, Write};
use std::process::ExitCode;
use std::time::Instant;

#[derive(Debug, Parser)]
#[command(
    name = "restricta",
    version,
    about = "Digit-restricted primes, exponential-sum bounds and metric approximation experiments"
)]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "json")]
    pub format: Format,
    /// Worker threads (results do not depend on this).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Forbid nondeterminism. Always on; accepted for forward compatibility.
    #[arg(long, global = true)]
    pub seedless: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Prime counts, progressions and the prime exponential sum.
    Primes(PrimesArgs),
    /// Count a digit-restricted set and its primes against the prediction.
    Census(CensusArgs),
    /// Digit-window bound sums, their scans and mean values of S_A.
    Fourier(FourierArgs),
    /// Perron-root certificates for the transition matrices of a base.
    Certify(CertifyArgs),
    /// Arc classification, minor-arc mass and the counting identity.
    Arcs(ArcsArgs),
    /// Metric Diophantine approximation.
    Dioph(DiophArgs),
    /// GCD graphs.
    Gcdgraph(GcdArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Primes(_) => "primes",
            Command::Census(_) => "census",
            Command::Fourier(_) => "fourier",
            Command::Certify(_) => "certify",
            Command::Arcs(_) => "arcs",
            Command::Dioph(_) => "dioph",
            Command::Gcdgraph(_) => "gcdgraph",
        }
    }
}

#[derive(Debug, Args)]
pub struct PrimesArgs {
    #[arg(long)]
    pub limit: u64,
    /// Count primes `p ≡ a (mod q)`, given as `q,a`.
    #[arg(long)]
    pub ap: Option<String>,
    /// Evaluate `Σ_{p≤N} e(pθ)`.
    #[arg(long = "exp-sum", allow_negative_numbers = true)]
    pub exp_sum: Option<f64>,
}

#[derive(Debug, Args)]
pub struct CensusArgs {
    /// Digit system, e.g. `q=10,exclude=7` or `q=10,D=0-6.8-9`.
    #[arg(long)]
    pub sys: DigitSystem,
    #[arg(long)]
    pub x: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Check {
    SinSum,
    Refined,
    Pairwise,
    Margin,
    Constant,
    MeanL1,
}

#[derive(Debug, Args)]
pub struct FourierArgs {
    #[arg(long, value_enum)]
    pub check: Check,
    #[arg(long)]
    pub sys: Option<DigitSystem>,
    #[arg(long)]
    pub q: Option<u32>,
    /// Inclusive range `qmin..qmax`.
    #[arg(long)]
    pub scan: Option<String>,
    /// Step between scanned bases.
    #[arg(long, default_value_t = 1)]
    pub stride: u32,
    /// Number of digits for `mean-l1`.
    #[arg(short = 'k')]
    pub k: Option<u32>,
    /// Grid points per cell for the certified maxima.
    #[arg(long)]
    pub grid: Option<usize>,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[arg(long)]
    pub sys: DigitSystem,
    #[arg(long = "ell-max")]
    pub ell_max: u32,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Defaults to `q^(1/5)`.
    #[arg(long)]
    pub threshold: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ArcsArgs {
    #[arg(long)]
    pub sys: DigitSystem,
    #[arg(short = 'k')]
    pub k: u32,
    /// Also assemble the full discrete counting identity.
    #[arg(long = "full-scan")]
    pub full_scan: bool,
    /// Exponent of the major-arc width `(log N)^A`.
    #[arg(long = "A", default_value_t = restricta::arcs::DEFAULT_A)]
    pub a: f64,
    /// Classify the single point `j/N` instead.
    #[arg(long)]
    pub point: Option<u128>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum DiophCmd {
    Series,
    Measure,
    Pairs,
    SelectR,
    Counterexample,
    Hausdorff,
    Dirichlet,
    Golden,
    Anatomy,
}

#[derive(Debug, Args)]
pub struct DiophArgs {
    #[arg(long, value_enum)]
    pub cmd: DiophCmd,
    /// `power:a`, `khinchin:eps`, `ds_base`, `ds_spread`, `constant:c`, or a
    /// CSV table file of `n,psi` lines.
    #[arg(long)]
    pub psi: Option<String>,
    #[arg(long)]
    pub q: Option<u64>,
    #[arg(long)]
    pub r: Option<u64>,
    #[arg(long = "Q")]
    pub q_lo: Option<u64>,
    #[arg(long = "R")]
    pub r_hi: Option<u64>,
    /// Restrict to reduced fractions.
    #[arg(long)]
    pub reduced: bool,
    #[arg(long, default_value_t = 1_000_000)]
    pub cap: u64,
    #[arg(long = "ell-max")]
    pub ell_max: Option<u64>,
    /// `m/n` or a decimal in `[0, 1]`.
    #[arg(long)]
    pub alpha: Option<String>,
    #[arg(long = "N")]
    pub n_max: Option<u64>,
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long)]
    pub x: Option<u64>,
    #[arg(long)]
    pub y: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum GcdCmd {
    Build,
    Model,
    Chow,
    GreenWalker,
    Compress,
}

#[derive(Debug, Args)]
pub struct GcdArgs {
    #[arg(long, value_enum)]
    pub cmd: GcdCmd,
    /// Newline-delimited integers.
    #[arg(long)]
    pub set: Option<std::path::PathBuf>,
    /// Second side for `green-walker` and `compress`; defaults to `--set`.
    #[arg(long)]
    pub set2: Option<std::path::PathBuf>,
    #[arg(long = "B")]
    pub b: Option<u64>,
    #[arg(long, default_value_t = 1.0)]
    pub eta: f64,
    #[arg(long)]
    pub y: Option<u64>,
    /// Single compression step at this prime; otherwise run the greedy driver.
    #[arg(long)]
    pub prime: Option<u64>,
}

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Compute(restricta::Error),
    Io(io::Error),
}

impl From<restricta::Error> for Failure {
    fn from(e: restricta::Error) -> Self {
        Failure::Compute(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .expect("thread pool is configured once");
    }
    let threads = rayon::current_num_threads();
    let start = Instant::now();
    let stdout = io::stdout();
    let mut sink = Sink::new(cli.format, stdout.lock());
    let code = match commands::run(&cli.command, &mut sink) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(Failure::Compute(e)) => {
            let body = serde_json::json!({"error": {"kind": e.kind(), "message": e.to_string()}});
            let _ = sink.json(&body);
            1
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            1
        }
    };
    let manifest = RunManifest {
        subcommand: cli.command.name().to_string(),
        argv: argv[1..].to_vec(),
        version: env!("CARGO_PKG_VERSION"),
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
        threads,
        digest: format!("sha256:{}", sink.digest()),
        exit_code: code,
    };
    let _ = writeln!(io::stderr(), "{}", canonical(&manifest));
    ExitCode::from(code as u8)
}
