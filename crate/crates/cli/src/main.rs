//! `momentlab`: coefficient tables, moments, singular series, counting and
//! Voronoi reports from the command line.
//!
//! Exit status is 0 on success, 1 for usage or environment errors and 2 when
//! a mathematical validation fails.

mod commands;
mod output;
mod range;
mod tables;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use output::{Format, Sink};
use range::ListArg;

#[derive(Parser, Debug)]
#[command(name = "momentlab", version, about = "Power moments of cusp form coefficient sums")]
struct Cli {
    #[command(flatten)]
    config: RunConfig,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct RunConfig {
    /// Weight of the cusp form (12, 16, 18, 20, 22 or 26)
    #[arg(long, global = true, default_value_t = 12)]
    pub weight: u32,

    /// Coefficient table length
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub nmax: Option<u64>,

    /// Working precision in bits
    #[arg(long, global = true, default_value_t = 128, value_parser = clap::value_parser!(u32).range(64..))]
    pub precision: u32,

    #[arg(long, global = true, env = "MOMENTLAB_CACHE", default_value = "cache")]
    pub cache_dir: PathBuf,

    /// Worker threads, 0 for one per core
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    #[arg(long, global = true, default_value_t = 20240601)]
    pub seed: u64,

    /// Write the report here instead of stdout
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    /// Read `a..b` ranges as {a, 2a, 4a, … ≤ b}
    #[arg(long, global = true)]
    pub dyadic: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build, validate and cache the coefficient table
    Coeffs {
        #[arg(long, default_value_t = 1000)]
        hecke_pairs: usize,
        #[arg(long, default_value_t = 100)]
        hecke_squares: usize,
    },
    /// Exact moments of A(x) against the main term (needs a cached table)
    Moments {
        #[arg(long)]
        k: u32,
        /// Endpoints: a list or, with --dyadic, a range
        #[arg(long)]
        t: ListArg<u64>,
        /// Truncation of the series behind C_k (default: table length)
        #[arg(long)]
        y: Option<u64>,
    },
    /// Truncated singular series s_{k;l} and its tail fit
    Constant {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        l: u32,
        #[arg(long)]
        y: ListArg<u64>,
    },
    /// Near-solution counts for four square roots
    Count {
        #[arg(long, value_parser = ["A1", "Apm"])]
        lemma: String,
        /// Sign of the third root for Apm
        #[arg(long, allow_hyphen_values = true, value_parser = ["+", "-"])]
        sign: Option<String>,
        /// Dyadic box N,M,K,L; repeatable
        #[arg(long = "box", required = true)]
        boxes: Vec<String>,
        #[arg(long)]
        delta: ListArg<f64>,
        /// Ratio count/bound above which a row is flagged
        #[arg(long, default_value_t = momentlab::counting::DEFAULT_ALARM)]
        alarm: f64,
    },
    /// Truncation error profile of the Voronoi formula
    Voronoi {
        /// Interval lo..hi of x
        #[arg(long, allow_hyphen_values = true)]
        x: ListArg<f64>,
        /// Truncation lengths
        #[arg(long)]
        n: ListArg<u64>,
        #[arg(long, default_value_t = 200)]
        grid: usize,
    },
    /// The four-term decomposition of R(x)^4
    Decompose {
        #[arg(long)]
        x: f64,
        #[arg(long)]
        y: u64,
        /// Largest acceptable relative residual
        #[arg(long, default_value_t = 1e-20)]
        tolerance: f64,
    },
    /// Minimum of the normalized square-root gap
    Gap {
        #[arg(long)]
        max_value: u64,
    },
    /// Quadrature of ∫_T^{2T} t^α cos(A√t + B) dt against its closed form
    Oscillatory {
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long, allow_hyphen_values = true)]
        a: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        b: f64,
        #[arg(long)]
        t: f64,
    },
}

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Validation(String),
}

impl From<momentlab::Error> for Failure {
    fn from(e: momentlab::Error) -> Self {
        if e.is_validation() {
            Failure::Validation(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

impl From<String> for Failure {
    fn from(msg: String) -> Self {
        Failure::Usage(msg)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let cfg = cli.config;
    momentlab::cuspform::check_weight(cfg.weight)?;
    if cfg.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    let sink = Sink::new(cfg.format, cfg.precision, cfg.output.clone());
    match cli.command {
        Command::Coeffs { hecke_pairs, hecke_squares } => commands::coeffs(&cfg, &sink, hecke_pairs, hecke_squares),
        Command::Moments { k, t, y } => commands::moments(&cfg, &sink, k, &t, y),
        Command::Constant { k, l, y } => commands::constant(&cfg, &sink, k, l, &y),
        Command::Count { lemma, sign, boxes, delta, alarm } => {
            commands::count(&sink, &lemma, sign.as_deref(), &boxes, &delta, alarm)
        }
        Command::Voronoi { x, n, grid } => commands::voronoi(&cfg, &sink, &x, &n, grid),
        Command::Decompose { x, y, tolerance } => commands::decompose(&cfg, &sink, x, y, tolerance),
        Command::Gap { max_value } => commands::gap(&sink, max_value),
        Command::Oscillatory { alpha, a, b, t } => commands::oscillatory(&cfg, &sink, alpha, a, b, t),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Validation(msg)) => {
            eprintln!("validation failed: {msg}");
            ExitCode::from(2)
        }
    }
}
