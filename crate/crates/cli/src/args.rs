use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use tensor_bicluster::bicluster::{BlockSize, Method};
use tensor_bicluster::ingest::FillPolicy;
use tensor_bicluster::spectral::{DEFAULT_GAP_THRESHOLD, DEFAULT_MAX_RANK};
use tensor_bicluster::synthetic::{NoiseModel, TimeProfile};

#[derive(Debug, Parser)]
#[command(name = "tbic", version, about = "Tensor biclustering by covariance folding")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a planted-bicluster tensor and its ground truth.
    Generate(GenerateArgs),
    /// Extract biclusters from a tensor file.
    Solve(SolveArgs),
    /// Score a solve result against ground truth and/or by trajectory correlation.
    Eval(EvalArgs),
    /// Mean recovery rate over a grid of signal strengths.
    Sweep(SweepArgs),
    /// Top eigenvalues of both folded covariance matrices.
    Spectrum(SpectrumArgs),
    /// Reshape a long-format CSV into a tensor file.
    Ingest(IngestArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub n1: usize,
    #[arg(long)]
    pub n2: usize,
    #[arg(long)]
    pub m: usize,
    /// Number of planted biclusters.
    #[arg(long, default_value_t = 1)]
    pub q: usize,
    /// Planted cardinality of every row and column set.
    #[arg(long)]
    pub k: usize,
    /// Noise model: I, II or none.
    #[arg(long, default_value = "II", value_parser = parse_noise)]
    pub noise: NoiseModel,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Shared time profile: constant (1/sqrt(m)) or random.
    #[arg(long, default_value = "constant", value_parser = parse_profile)]
    pub time_profile: TimeProfile,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub synth: SynthArgs,
    /// Signal strengths, comma separated, non-increasing.
    #[arg(long, value_delimiter = ',', required = true)]
    pub sigma: Vec<f64>,
    /// Output tensor (.tns).
    #[arg(long)]
    pub tensor: PathBuf,
    /// Output ground truth (JSON).
    #[arg(long)]
    pub truth: PathBuf,
}

#[derive(Debug, Args)]
pub struct GapArgs {
    /// Eigenvalue ratio that counts as a gap.
    #[arg(long, default_value_t = DEFAULT_GAP_THRESHOLD)]
    pub theta: f64,
    /// Largest rank the gap search considers.
    #[arg(long, default_value_t = DEFAULT_MAX_RANK)]
    pub max_rank: usize,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// single, recursive, multiple or auto.
    #[arg(long, default_value = "single", value_parser = parse_method)]
    pub method: Method,
    /// Block sizes: `rows:cols` per bicluster, comma separated; a bare number means rows = cols.
    #[arg(long, value_parser = parse_sizes)]
    pub k: SizeList,
    #[command(flatten)]
    pub gap: GapArgs,
    /// Output BiclusterSet JSON.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// BiclusterSet JSON written by `solve`.
    #[arg(long)]
    pub result: PathBuf,
    /// Ground truth JSON written by `generate`.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Tensor the result was computed on, for correlation reports.
    #[arg(long)]
    pub tensor: Option<PathBuf>,
    /// Directory for per-bicluster correlation CSVs.
    #[arg(long, requires = "tensor")]
    pub corr_dir: Option<PathBuf>,
    /// Uncentered cosine similarity instead of Pearson correlation.
    #[arg(long)]
    pub raw_cosine: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub synth: SynthArgs,
    /// Values of sigma1; each further bicluster gets 2/3 of the previous strength.
    #[arg(long, value_delimiter = ',', required = true)]
    pub sigma1_grid: Vec<f64>,
    #[arg(long, default_value_t = 10)]
    pub reps: usize,
    #[arg(long, default_value = "multiple", value_parser = parse_method)]
    pub method: Method,
    /// Output CSV.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Eigenvalues written per matrix.
    #[arg(long, default_value_t = 5)]
    pub top: usize,
    #[command(flatten)]
    pub gap: GapArgs,
    /// Output CSV `matrix,rank,eigenvalue`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// CSV with header and columns dim1,dim2,dim3,value.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Missing cells: zero, error or mean.
    #[arg(long, default_value = "zero", value_parser = parse_fill)]
    pub fill: FillPolicy,
}

#[derive(Debug, Clone)]
pub struct SizeList(pub Vec<BlockSize>);

pub fn parse_sizes(text: &str) -> Result<SizeList, String> {
    let parse_count = |s: &str| -> Result<usize, String> {
        let v: usize = s.trim().parse().map_err(|_| format!("invalid count {s:?}"))?;
        if v == 0 {
            return Err("counts must be positive".into());
        }
        Ok(v)
    };
    let sizes = text
        .split(',')
        .map(|item| match item.split_once(':') {
            Some((r, c)) => Ok(BlockSize::new(parse_count(r)?, parse_count(c)?)),
            None => parse_count(item).map(BlockSize::square),
        })
        .collect::<Result<Vec<_>, String>>()?;
    Ok(SizeList(sizes))
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: tensor_bicluster::Error| e.to_string())
}

fn parse_noise(s: &str) -> Result<NoiseModel, String> {
    s.parse().map_err(|e: tensor_bicluster::Error| e.to_string())
}

fn parse_profile(s: &str) -> Result<TimeProfile, String> {
    s.parse().map_err(|e: tensor_bicluster::Error| e.to_string())
}

fn parse_fill(s: &str) -> Result<FillPolicy, String> {
    s.parse().map_err(|e: tensor_bicluster::Error| e.to_string())
}
