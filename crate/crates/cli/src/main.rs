//! `faithdp` command line: dataset generation, blocked parallel clustering,
//! the quadratic reference run, metric evaluation, and a size-sweep
//! benchmark.
//!
//! Exit codes: 0 success, 2 usage/config, 3 I/O, 4 data validation,
//! 5 guard refusal.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use faithdp::{ClusterCount, DcMode, Kernel, RunConfig, DEFAULT_SEED};

mod commands;
mod io;

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_IO: u8 = 3;
pub const EXIT_DATA: u8 = 4;
pub const EXIT_GUARD: u8 = 5;

/// An error carrying its process exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
    pub fn io(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_IO,
            message: message.into(),
        }
    }
    pub fn data(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_DATA,
            message: message.into(),
        }
    }
    pub fn guard(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_GUARD,
            message: message.into(),
        }
    }
}

impl From<faithdp::Error> for CliError {
    fn from(err: faithdp::Error) -> Self {
        use faithdp::Error::*;
        let code = match &err {
            InvalidConfig(_) => EXIT_USAGE,
            InvalidInput(_) | DegenerateData(_) => EXIT_DATA,
            Refused(_) => EXIT_GUARD,
            WindowOutOfRange { .. } | WorkerFailed { .. } | Internal(_) => 1,
        };
        CliError {
            code,
            message: err.to_string(),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "faithdp",
    version,
    about = "Density-peaks clustering with linear memory and a parallel pipeline \
             whose output is identical to the quadratic reference"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset (points + ground-truth labels).
    Gen(GenArgs),
    /// Cluster a dataset with the blocked parallel pipeline.
    Cluster(ClusterArgs),
    /// Run the quadratic reference implementation (small inputs only).
    Oracle(OracleArgs),
    /// Score a predicted labeling against a reference labeling.
    Eval(EvalArgs),
    /// Sweep dataset sizes and emit a CSV timing/accuracy table.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
pub enum DataKind {
    /// Five interleaved spiral arms in 2-D.
    Spirals5,
    /// Isotropic Gaussian blobs.
    Blobs,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum MetricArg {
    Euclidean,
    Cosine,
    /// Input file is a full n x n distance matrix.
    Precomputed,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum KernelArg {
    Gaussian,
    Cutoff,
}

impl From<KernelArg> for Kernel {
    fn from(k: KernelArg) -> Kernel {
        match k {
            KernelArg::Gaussian => Kernel::Gaussian,
            KernelArg::Cutoff => Kernel::Cutoff,
        }
    }
}

#[derive(Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub kind: DataKind,
    /// Total points.
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Output directory (points.fdpm, labels.csv, meta.json).
    #[arg(long)]
    pub out: PathBuf,
    /// Coordinate noise sigma (spirals).
    #[arg(long, default_value_t = 0.05)]
    pub noise: f64,
    /// Spiral radius intercept a in r = a + b t.
    #[arg(long)]
    pub spiral_a: Option<f64>,
    /// Spiral radius slope b in r = a + b t.
    #[arg(long)]
    pub spiral_b: Option<f64>,
    /// Spiral parameter range start.
    #[arg(long)]
    pub t_start: Option<f64>,
    /// Spiral parameter range end.
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Cluster count (blobs).
    #[arg(long, default_value_t = 3)]
    pub clusters: usize,
    /// Dimensions (blobs).
    #[arg(long, default_value_t = 2)]
    pub dims: usize,
    /// Center separation (blobs).
    #[arg(long, default_value_t = 10.0)]
    pub separation: f64,
    /// Per-cluster sigma (blobs).
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
}

#[derive(Args)]
pub struct ClusterArgs {
    /// Input data: .fdpm or CSV.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = MetricArg::Euclidean)]
    pub metric: MetricArg,
    #[arg(long, value_enum, default_value_t = KernelArg::Gaussian)]
    pub kernel: KernelArg,
    /// Explicit cutoff distance.
    #[arg(long, conflicts_with = "dc_percentile")]
    pub dc: Option<f64>,
    /// Estimate the cutoff distance as this percentile of sampled pairwise
    /// distances.
    #[arg(long, default_value_t = 2.0)]
    pub dc_percentile: f64,
    /// Nearest neighbors kept per point.
    #[arg(long, default_value_t = 16)]
    pub k: usize,
    /// Rows per distance block.
    #[arg(long, default_value_t = 1024)]
    pub batch: usize,
    /// Worker count; defaults to FAITHDP_WORKERS or available parallelism.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Explicit cluster count.
    #[arg(long, conflicts_with = "auto_c")]
    pub clusters: Option<usize>,
    /// Choose the cluster count from the potential-gap heuristic (default).
    #[arg(long)]
    pub auto_c: bool,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Output directory (labels.csv, report.json).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = MetricArg::Euclidean)]
    pub metric: MetricArg,
    #[arg(long, value_enum, default_value_t = KernelArg::Gaussian)]
    pub kernel: KernelArg,
    #[arg(long, conflicts_with = "dc_percentile")]
    pub dc: Option<f64>,
    #[arg(long, default_value_t = 2.0)]
    pub dc_percentile: f64,
    #[arg(long, conflicts_with = "auto_c")]
    pub clusters: Option<usize>,
    #[arg(long)]
    pub auto_c: bool,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Output directory (labels.csv, vectors.csv).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct EvalArgs {
    /// Predicted labels (index,label CSV).
    #[arg(long)]
    pub pred: PathBuf,
    /// Reference labels (index,label CSV).
    #[arg(long)]
    pub truth: PathBuf,
}

#[derive(Args)]
pub struct BenchArgs {
    #[arg(long, value_enum, default_value_t = DataKind::Spirals5)]
    pub kind: DataKind,
    /// Comma-separated sizes; k/m suffixes allowed (e.g. 10k,20k,40k).
    #[arg(long)]
    pub sizes: String,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = KernelArg::Gaussian)]
    pub kernel: KernelArg,
    #[arg(long, default_value_t = 2.0)]
    pub dc_percentile: f64,
    #[arg(long, default_value_t = 16)]
    pub k: usize,
    #[arg(long, default_value_t = 1024)]
    pub batch: usize,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Cluster count; defaults to the generator's ground-truth count.
    #[arg(long)]
    pub clusters: Option<usize>,
    /// Blob dimensions (blobs only).
    #[arg(long, default_value_t = 2)]
    pub dims: usize,
    /// Output CSV path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Worker resolution: an explicit flag wins, then FAITHDP_WORKERS, then the
/// library default (available parallelism capped at the batch count).
fn resolve_workers(flag: Option<usize>) -> Result<Option<usize>, CliError> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var("FAITHDP_WORKERS") {
        Ok(v) => {
            let parsed: usize = v
                .trim()
                .parse()
                .map_err(|_| CliError::usage(format!("FAITHDP_WORKERS={v} is not a count")))?;
            if parsed == 0 {
                return Err(CliError::usage("FAITHDP_WORKERS must be >= 1"));
            }
            Ok(Some(parsed))
        }
        Err(_) => Ok(None),
    }
}

#[allow(clippy::too_many_arguments)] // mirrors the flag list one-to-one
fn run_config(
    kernel: KernelArg,
    dc: Option<f64>,
    dc_percentile: f64,
    k: usize,
    batch: usize,
    workers: Option<usize>,
    clusters: Option<usize>,
    seed: u64,
) -> Result<RunConfig, CliError> {
    Ok(RunConfig {
        kernel: kernel.into(),
        dc: match dc {
            Some(v) => DcMode::Explicit(v),
            None => DcMode::Percentile(dc_percentile),
        },
        k,
        batch_size: batch,
        workers: resolve_workers(workers)?,
        clusters: match clusters {
            Some(c) => ClusterCount::Explicit(c),
            None => ClusterCount::Auto,
        },
        seed,
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(args) => commands::gen(&args),
        Command::Cluster(args) => commands::cluster(&args),
        Command::Oracle(args) => commands::oracle(&args),
        Command::Eval(args) => commands::eval(&args),
        Command::Bench(args) => commands::bench(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
