//! `twobridge`: exact tables, slice-genus bounds, Monte-Carlo sweeps and the
//! random-walk experiment for 2-bridge knots `K(2a_1, ..., 2a_2m)`.

mod output;

use std::io::IsTerminal;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;

use twobridge::cobordism::{bound_summary, g4_upper_bound, param_grid, replay, CobordismTrace};
use twobridge::montecarlo::{
    theorem1_report, walk_experiment, SamplerConfig, WalkExperimentConfig, DEFAULT_SEED,
    DEFAULT_WORK_CAP,
};
use twobridge::partition::{enumerate_words, AverageMode, DEFAULT_ENUMERATION_CAP};
use twobridge::report::exact_rows;
use twobridge::{EngineError, SampleError, StatsError, TwistWord};

use output::{Format, Output};

const WORKERS_ENV: &str = "TWOBRIDGE_WORKERS";

#[derive(Parser, Debug)]
#[command(name = "twobridge", version, about, long_about = None)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Seed for randomized commands
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Worker threads; never changes results
    #[arg(long, global = true, env = WORKERS_ENV)]
    workers: Option<usize>,
    /// Output format (default: table on a terminal, csv otherwise)
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write output here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Words,
    Knots,
}

impl From<ModeArg> for AverageMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Words => AverageMode::Words,
            ModeArg::Knots => AverageMode::Knots,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact average genus <g>_n, <g>_n/n and tail fraction for n = 2..n_max
    Exact {
        #[arg(long)]
        n_max: u64,
        /// Ignore signs (unsigned compositions)
        #[arg(long)]
        unsigned: bool,
        #[arg(long, value_enum, default_value = "words")]
        mode: ModeArg,
        /// Largest n enumerated in knots mode
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
        cap: u64,
    },
    /// Certified 4-genus upper bound for one word
    ///
    /// Words are half-parameters: `--word 1,-1` is the trefoil K(2,-2).
    /// Several values for --k or --s search the grid for the least bound.
    Bound {
        /// Comma-separated nonzero integers a_1,...,a_2m
        #[arg(long, allow_hyphen_values = true)]
        word: String,
        #[arg(long, value_delimiter = ',', default_value = "32")]
        k: Vec<u64>,
        #[arg(long, value_delimiter = ',', default_value = "2")]
        s: Vec<u64>,
        /// Print the replayable step list
        #[arg(long)]
        trace: bool,
    },
    /// Monte-Carlo <g4/g>_n trend over a grid of n
    Sweep {
        #[arg(long, value_delimiter = ',', default_value = "100,1000,10000")]
        n_grid: Vec<u64>,
        #[arg(long, value_delimiter = ',', default_value = "2,3,4")]
        k: Vec<u64>,
        #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
        s: Vec<u64>,
        #[arg(long, default_value_t = 1000)]
        samples: u64,
        /// Maximum n x samples per row
        #[arg(long, default_value_t = DEFAULT_WORK_CAP)]
        work_cap: u64,
    },
    /// Mirror-pair discrepancy of t random summand types
    Walk {
        #[arg(long, default_value_t = 1)]
        k: u64,
        #[arg(long, default_value_t = 1)]
        s: u64,
        #[arg(long, default_value_t = 100_000)]
        t: u64,
        #[arg(long, default_value_t = 100)]
        trials: u64,
    },
    /// Every signed word of complexity n
    Enumerate {
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
        cap: u64,
    },
    /// Check a saved trace (text or JSON)
    Replay {
        #[arg(long)]
        trace_file: PathBuf,
    },
}

/// Exit statuses: 1 validation, 2 resource cap, 3 invariant violation.
#[derive(Debug)]
enum Failure {
    Validation(String),
    ResourceCap(String),
    Invariant(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 1,
            Failure::ResourceCap(_) => 2,
            Failure::Invariant(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Validation(m) | Failure::ResourceCap(m) | Failure::Invariant(m) => m,
        }
    }
}

impl From<StatsError> for Failure {
    fn from(e: StatsError) -> Self {
        match e {
            StatsError::EnumerationCap { .. } => Failure::ResourceCap(e.to_string()),
            StatsError::RatioBelowQuarter { .. } => Failure::Invariant(e.to_string()),
            StatsError::ComplexityTooSmall(_) => Failure::Validation(e.to_string()),
        }
    }
}

impl From<EngineError> for Failure {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::Replay { .. } => Failure::Invariant(e.to_string()),
            _ => Failure::Validation(e.to_string()),
        }
    }
}

impl From<SampleError> for Failure {
    fn from(e: SampleError) -> Self {
        Failure::Validation(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Validation(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Invariant(e.to_string())
    }
}

struct Context {
    workers: usize,
    /// Set when the worker count came from the environment.
    workers_from_env: bool,
    seed: u64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let common = cli.common;
    let format =
        common
            .format
            .unwrap_or(if common.out.is_none() && std::io::stdout().is_terminal() {
                Format::Table
            } else {
                Format::Csv
            });
    let flag_given = std::env::args().any(|a| a == "--workers" || a.starts_with("--workers="));
    let ctx = Context {
        workers: match common.workers {
            Some(0) => return Err(Failure::Validation("--workers must be positive".into())),
            Some(w) => w,
            None => std::thread::available_parallelism().map_or(1, |p| p.get()),
        },
        workers_from_env: !flag_given && std::env::var_os(WORKERS_ENV).is_some(),
        seed: common.seed,
    };
    let mut out = Output::new(format);
    if ctx.workers_from_env {
        out.note(format!("workers: {} (from {WORKERS_ENV})", ctx.workers));
    }

    let result = match cli.command {
        Command::Exact {
            n_max,
            unsigned,
            mode,
            cap,
        } => cmd_exact(&mut out, n_max, !unsigned, mode.into(), cap),
        Command::Bound { word, k, s, trace } => cmd_bound(&mut out, &word, &k, &s, trace),
        Command::Sweep {
            n_grid,
            k,
            s,
            samples,
            work_cap,
        } => cmd_sweep(&mut out, &ctx, &n_grid, &k, &s, samples, work_cap),
        Command::Walk { k, s, t, trials } => cmd_walk(&mut out, &ctx, k, s, t, trials),
        Command::Enumerate { n, cap } => cmd_enumerate(&mut out, n, cap),
        Command::Replay { trace_file } => cmd_replay(&mut out, &trace_file),
    };
    // Partial output is still worth writing before reporting the failure.
    out.finish(
        common.out.as_deref(),
        ctx.workers_from_env.then_some(ctx.workers),
    )?;
    result
}

fn cmd_exact(
    out: &mut Output,
    n_max: u64,
    signed: bool,
    mode: AverageMode,
    cap: u64,
) -> Result<(), Failure> {
    let rows = exact_rows(n_max, signed, mode, cap)?;
    let quarter = BigRational::new(BigInt::from(1), BigInt::from(4));
    let low: Vec<u64> = rows
        .iter()
        .filter(|r| r.ratio() < quarter)
        .map(|r| r.n)
        .collect();
    out.exact(&rows)?;
    if let Some(n) = low.first() {
        return Err(Failure::Invariant(format!("<g>_n / n < 1/4 at n = {n}")));
    }
    Ok(())
}

fn parse_word(s: &str) -> Result<TwistWord, Failure> {
    s.parse()
        .map_err(|e| Failure::Validation(format!("invalid word `{s}`: {e}")))
}

fn cmd_bound(
    out: &mut Output,
    word: &str,
    ks: &[u64],
    ss: &[u64],
    trace: bool,
) -> Result<(), Failure> {
    let w = parse_word(word)?;
    let grid = param_grid(ks, ss)?;
    let best = grid
        .iter()
        .map(|&p| bound_summary(&w, p))
        .min_by_key(|s| (s.bound(), s.params))
        .expect("grid is nonempty");
    let t = g4_upper_bound(&w, best.params);
    let report = replay(&t)?;
    if report.bound != best.bound() {
        return Err(Failure::Invariant("trace and summary disagree".into()));
    }
    out.bound(&w, &best, &t, grid.len(), trace)?;
    Ok(())
}

fn cmd_sweep(
    out: &mut Output,
    ctx: &Context,
    n_grid: &[u64],
    ks: &[u64],
    ss: &[u64],
    samples: u64,
    work_cap: u64,
) -> Result<(), Failure> {
    let grid = param_grid(ks, ss)?;
    let cfg = SamplerConfig {
        worker_count: ctx.workers,
        work_cap,
        ..SamplerConfig::new(0, samples, ctx.seed)
    };
    let report = theorem1_report(n_grid, &cfg, &grid)?;
    out.sweep(&report)?;
    let partial: Vec<String> = report
        .rows
        .iter()
        .filter(|r| !r.complete)
        .map(|r| r.n.to_string())
        .collect();
    if !partial.is_empty() {
        return Err(Failure::ResourceCap(format!(
            "work cap reached; rows for n = {} are partial",
            partial.join(", ")
        )));
    }
    Ok(())
}

fn cmd_walk(
    out: &mut Output,
    ctx: &Context,
    k: u64,
    s: u64,
    t: u64,
    trials: u64,
) -> Result<(), Failure> {
    let report = walk_experiment(&WalkExperimentConfig {
        k,
        s,
        t,
        trials,
        seed: ctx.seed,
    })?;
    out.walk(&report)?;
    Ok(())
}

fn cmd_enumerate(out: &mut Output, n: u64, cap: u64) -> Result<(), Failure> {
    let words = enumerate_words(n, cap)?;
    out.words(words)?;
    Ok(())
}

fn cmd_replay(out: &mut Output, path: &std::path::Path) -> Result<(), Failure> {
    let text = std::fs::read_to_string(path)?;
    let trace: CobordismTrace = if text.trim_start().starts_with('{') {
        serde_json::from_str(&text)
            .map_err(|e| Failure::Validation(format!("bad JSON trace: {e}")))?
    } else {
        text.parse()?
    };
    let report = replay(&trace)?;
    out.replay(&trace, &report)?;
    Ok(())
}
