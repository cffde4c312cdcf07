use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;

#[derive(Debug, Parser)]
#[command(name = "rangeann", version, about = "Range retrieval on graph-based ANN indices")]
pub struct Cli {
    /// Worker threads (default: hardware parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a proximity graph over a point file.
    Build(BuildArgs),
    /// Compute exact range ground truth by exhaustive scan.
    Gt(GtArgs),
    /// Sweep beam widths and report QPS against average precision.
    Search(SearchArgs),
    /// Fraction of the dataset captured by balls of increasing radius.
    AnalyzeRadius(AnalyzeRadiusArgs),
    /// Distribution of per-query result counts of a ground-truth file.
    AnalyzeFreq(AnalyzeFreqArgs),
    /// Generate a clustered synthetic dataset with matching queries.
    Synth(SynthArgs),
    /// Reduce a benchmark CSV to its Pareto frontier.
    Pareto(ParetoArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Point file (.fbin, .u8bin or .i8bin).
    #[arg(long)]
    data: PathBuf,
    /// Distance: l2 (squared Euclidean) or ip (negative inner product).
    #[arg(long, default_value = "l2")]
    metric: String,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    out: PathBuf,
    #[arg(short = 'R', long = "max-degree", default_value_t = 64)]
    max_degree: usize,
    #[arg(short = 'L', long = "build-beam", default_value_t = 128)]
    build_beam: usize,
    #[arg(long, default_value_t = 1.15)]
    alpha: f32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Insert points one at a time (bit-reproducible).
    #[arg(long)]
    sequential: bool,
}

#[derive(Debug, Args)]
pub struct GtArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    queries: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    radius: f32,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    queries: PathBuf,
    #[arg(long)]
    graph: PathBuf,
    /// Range ground-truth file computed at --radius.
    #[arg(long)]
    gt: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    radius: f32,
    /// Comma-separated strategies: baseline, greedy, doubling.
    #[arg(long, value_delimiter = ',', default_value = "greedy")]
    strategy: Vec<String>,
    /// Comma-separated initial beam widths.
    #[arg(long, value_delimiter = ',', required = true)]
    beams: Vec<usize>,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    /// Enable early stopping of the first beam search.
    #[arg(long)]
    early_stop: bool,
    /// Visits before early stopping may fire.
    #[arg(long, default_value_t = 20)]
    vl: usize,
    /// Early-stopping radius.
    #[arg(long, allow_hyphen_values = true)]
    esr: Option<f32>,
    /// d_visited, d_top1, d_top10, d_top10_over_d_start, visited_outside_beam or never.
    #[arg(long, default_value = "d_visited")]
    es_metric: String,
    /// Search on 8-bit scalar-quantized vectors, re-checking results exactly.
    #[arg(long)]
    quantize: bool,
    /// Benchmark CSV.
    #[arg(long)]
    out: PathBuf,
    /// Per-strategy Pareto frontier CSV.
    #[arg(long)]
    pareto_out: Option<PathBuf>,
    /// Write each sweep point's per-query results here, in ground-truth format.
    #[arg(long)]
    dump_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeRadiusArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    queries: PathBuf,
    /// Explicit comma-separated radii (ascending).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    radii: Vec<f32>,
    #[arg(long, allow_hyphen_values = true)]
    rmin: Option<f32>,
    #[arg(long, allow_hyphen_values = true)]
    rmax: Option<f32>,
    #[arg(long, default_value_t = 20)]
    steps: usize,
    /// Points sampled per query ball (0 = exact).
    #[arg(long, default_value_t = 0)]
    sample: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AnalyzeFreqArgs {
    #[arg(long)]
    gt: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    #[arg(long, default_value_t = 32)]
    dim: usize,
    #[arg(long, default_value_t = 20)]
    clusters: usize,
    #[arg(long, default_value_t = 0.1)]
    spread: f32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output point file (.fbin).
    #[arg(long)]
    data_out: PathBuf,
    /// Output query file (.fbin).
    #[arg(long)]
    queries_out: PathBuf,
    /// Suggested radii CSV.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ParetoArgs {
    /// Benchmark CSV written by `search`.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
