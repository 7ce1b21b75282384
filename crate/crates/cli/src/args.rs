use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "dpm-seq", version, about = "One-pass Dirichlet process mixture fitting")]
pub struct Cli {
    /// Worker threads for ordering search and grid runs.
    #[arg(long, global = true, env = "DPM_SEQ_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw a synthetic three-component mixture sample.
    Gen(GenArgs),
    /// Fit a model and write a model dump.
    Fit(FitArgs),
    /// Evaluate a dumped model's predictive density on a grid.
    Density(DensityArgs),
    /// Run an experiment grid and write one row per fit.
    Bench(BenchArgs),
    /// Relative error of SUGS and VSUGS against a Gibbs reference.
    Compare(CompareArgs),
    /// Three-class sequential genotype calling.
    Genotype(GenotypeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EngineArg {
    Sugs,
    Vsugs,
    Gibbs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SequentialEngineArg {
    Sugs,
    Vsugs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CriterionArg {
    LowerBound,
    PseudoMarginal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum HeaderArg {
    Auto,
    Yes,
    No,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, default_value = ".")]
    pub output_dir: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Comma-delimited observations, one per row.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = HeaderArg::Auto)]
    pub header: HeaderArg,
    /// The last column holds integer labels.
    #[arg(long)]
    pub labels: bool,
}

/// Normal–inverse-gamma prior; in `d > 1` dimensions these map to a
/// normal–inverse-Wishart prior with mean `ρ·1`, `κ = 1/ν`,
/// `df = 2a + d − 1` and `Ψ = 2b·I`.
#[derive(Debug, Clone, Copy, Args)]
pub struct PriorArgs {
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub prior_rho: f64,
    #[arg(long, default_value_t = 1.0)]
    pub prior_nu: f64,
    #[arg(long, default_value_t = 1.0)]
    pub prior_a: f64,
    #[arg(long, default_value_t = 1.0)]
    pub prior_b: f64,
}

#[derive(Debug, Clone, Copy, Args)]
pub struct GibbsArgs {
    #[arg(long, default_value_t = 300)]
    pub burnin: usize,
    /// Retained sweeps after burn-in.
    #[arg(long, default_value_t = 1000)]
    pub iters: usize,
}

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub dmu: f64,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Append the generating component as a label column.
    #[arg(long)]
    pub with_labels: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum)]
    pub engine: EngineArg,
    #[arg(long)]
    pub alpha: f64,
    /// Truncation level; required for vsugs, optional for sugs and gibbs.
    #[arg(long)]
    pub trunc: Option<usize>,
    #[arg(long, default_value_t = 50)]
    pub orderings: usize,
    #[arg(long, value_enum)]
    pub criterion: Option<CriterionArg>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub prior: PriorArgs,
    #[command(flatten)]
    pub gibbs: GibbsArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct DensityArgs {
    /// Model dump written by `fit`.
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, allow_negative_numbers = true)]
    pub grid_min: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub grid_max: f64,
    #[arg(long, default_value_t = 201)]
    pub grid_steps: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_value = "0.2")]
    pub dmu: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0.1")]
    pub alpha: Vec<f64>,
    #[arg(long, value_delimiter = ',', value_enum, default_value = "sugs,vsugs")]
    pub engines: Vec<EngineArg>,
    #[arg(long, default_value_t = 500)]
    pub n: usize,
    #[arg(long, default_value_t = 20)]
    pub replicates: usize,
    #[arg(long, default_value_t = 150)]
    pub trunc: usize,
    #[arg(long, default_value_t = 50)]
    pub orderings: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Run the Gibbs reference so that `rel_err` is filled in.
    #[arg(long)]
    pub gibbs_reference: bool,
    /// Leave `wall_ms` empty so that output is byte-reproducible.
    #[arg(long)]
    pub no_timing: bool,
    #[command(flatten)]
    pub prior: PriorArgs,
    #[command(flatten)]
    pub gibbs: GibbsArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    /// Data to compare on; without it a synthetic sample is drawn.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = HeaderArg::Auto)]
    pub header: HeaderArg,
    #[arg(long)]
    pub labels: bool,
    #[arg(long, default_value_t = 0.2, allow_negative_numbers = true)]
    pub dmu: f64,
    #[arg(long, default_value_t = 500)]
    pub n: usize,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub trunc: usize,
    #[arg(long, default_value_t = 50)]
    pub orderings: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub prior: PriorArgs,
    #[command(flatten)]
    pub gibbs: GibbsArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct GenotypeArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum, default_value_t = SequentialEngineArg::Vsugs)]
    pub engine: SequentialEngineArg,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 20)]
    pub trunc: usize,
    /// Class anchors as `x,y;x,y;x,y`; defaults to quantile anchors.
    #[arg(long, allow_hyphen_values = true)]
    pub anchors: Option<String>,
    /// Apply log2 and quantile normalization to two-channel intensities.
    #[arg(long)]
    pub normalize: bool,
    #[command(flatten)]
    pub prior: PriorArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}
