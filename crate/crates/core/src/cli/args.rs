use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::discretize::BinMethod;
use crate::ingest::{GraphSource, ReportFormat};

/// Causal attribution of speech recognition errors.
#[derive(Debug, Parser)]
#[command(name = "asrcause", version)]
pub struct RunConfig {
    /// Worker threads (at least 1). Defaults to the available parallelism.
    #[arg(long, global = true, env = "ASRCAUSE_JOBS", value_parser = clap::value_parser!(u32).range(1..))]
    pub jobs: Option<u32>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score every hypothesis against its reference (S/D/I/WER).
    Align(AlignArgs),
    /// Derive GoP, vocabulary difficulty, SNR and word counts.
    Covariates(CovariateArgs),
    /// Fit or apply binning schemes and write a discrete dataset.
    Discretize(DiscretizeArgs),
    /// Per-utterance best-model selection.
    Oracle(OracleArgs),
    /// Pearson correlation of utterance WER between models.
    Correlate(CorrelateArgs),
    /// Fit conditional probability tables.
    Fit(FitArgs),
    /// Average causal effect of one treatment on one effect.
    Ace(AceArgs),
    /// Conditional mutual information between two variables.
    Cmi(CmiArgs),
    /// ACE and CMI for every edge of the graph.
    Report(ReportArgs),
    /// Sample a dataset from a structural causal model.
    Synth(SynthArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GroupBy {
    Grade,
    Gender,
    Speaker,
    None,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Structured,
    Delimited,
}

impl From<FormatArg> for ReportFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Structured => ReportFormat::Structured,
            FormatArg::Delimited => ReportFormat::Delimited,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Sigma,
    Kde,
    Quantile,
}

impl From<MethodArg> for BinMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Sigma => BinMethod::Sigma,
            MethodArg::Kde => BinMethod::Kde,
            MethodArg::Quantile => BinMethod::Quantile,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ConditioningArg {
    OtherParents,
    Empty,
}

fn graph_source(s: &str) -> Result<GraphSource, String> {
    s.parse().map_err(|e: std::convert::Infallible| e.to_string())
}

#[derive(Debug, Args)]
pub struct GraphArg {
    /// `paper-default`, `fig3e` or a path to a graph document.
    #[arg(long, default_value = "paper-default", value_parser = graph_source)]
    pub graph: GraphSource,
}

#[derive(Debug, Args)]
pub struct AlignArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Restrict to these models (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub models: Vec<String>,
    /// Write per-model aggregates here.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "grade")]
    pub group_by: GroupBy,
    /// Directory for the per-group error table.
    #[arg(long)]
    pub plot_dir: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "structured")]
    pub format: FormatArg,
    /// Rebuild even when outputs are newer than inputs.
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct CovariateArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Word frequency tables (`word,count`); several are pooled.
    #[arg(long = "freq")]
    pub freq: Vec<PathBuf>,
    #[arg(long, requires_all = ["segments", "inventory"])]
    pub posteriors: Option<PathBuf>,
    #[arg(long, requires_all = ["posteriors", "inventory"])]
    pub segments: Option<PathBuf>,
    #[arg(long, requires_all = ["posteriors", "segments"])]
    pub inventory: Option<PathBuf>,
    /// Floor applied to posteriors before taking logs.
    #[arg(long)]
    pub gop_floor: Option<f64>,
    /// Directory of `<id>.wav` or `<id>.raw` files.
    #[arg(long)]
    pub audio_dir: Option<PathBuf>,
    /// Sample rate of raw PCM files.
    #[arg(long, default_value_t = 16_000)]
    pub sample_rate: u32,
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct DiscretizeArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Model whose errors become the effect variables.
    #[arg(long)]
    pub model: String,
    #[arg(long)]
    pub out: PathBuf,
    /// Write the fitted schemes here.
    #[arg(long)]
    pub schemes_out: Option<PathBuf>,
    /// Apply these schemes instead of fitting.
    #[arg(long, conflicts_with = "schemes_out")]
    pub schemes_in: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    pub bins: usize,
    #[arg(long, value_enum, default_value = "sigma")]
    pub gop_method: MethodArg,
    #[arg(long, value_enum, default_value = "kde")]
    pub vocab_method: MethodArg,
    #[arg(long, value_enum, default_value = "quantile")]
    pub snr_method: MethodArg,
    #[arg(long, value_enum, default_value = "quantile")]
    pub words_method: MethodArg,
    #[arg(long, value_enum, default_value = "quantile")]
    pub error_method: MethodArg,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, value_delimiter = ',')]
    pub models: Vec<String>,
    #[arg(long)]
    pub out: PathBuf,
    /// Per-utterance selected model as `id,model`.
    #[arg(long)]
    pub selection: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "grade")]
    pub group_by: GroupBy,
    #[arg(long, value_enum, default_value = "structured")]
    pub format: FormatArg,
}

#[derive(Debug, Args)]
pub struct CorrelateArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, value_delimiter = ',')]
    pub models: Vec<String>,
    /// Matrix file with a header row.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[command(flatten)]
    pub graph: GraphArg,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SmoothingArgs {
    /// Pseudo-count shrinking sparse strata toward the level mean.
    #[arg(long, default_value_t = 1.0)]
    pub smoothing: f64,
    /// Fail on empty strata instead of smoothing.
    #[arg(long)]
    pub no_smoothing: bool,
}

impl SmoothingArgs {
    pub fn value(&self) -> Option<f64> {
        (!self.no_smoothing).then_some(self.smoothing)
    }
}

#[derive(Debug, Args)]
pub struct AceArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[command(flatten)]
    pub graph: GraphArg,
    #[arg(long)]
    pub treatment: String,
    #[arg(long)]
    pub effect: String,
    #[arg(long)]
    pub lo: Option<String>,
    #[arg(long)]
    pub hi: Option<String>,
    #[command(flatten)]
    pub smoothing: SmoothingArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "structured")]
    pub format: FormatArg,
}

#[derive(Debug, Args)]
pub struct CmiArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub x: String,
    #[arg(long)]
    pub y: String,
    /// Conditioning variables (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub given: Vec<String>,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "structured")]
    pub format: FormatArg,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Discrete datasets, one per model.
    #[arg(long = "in", required = true)]
    pub inputs: Vec<PathBuf>,
    #[command(flatten)]
    pub graph: GraphArg,
    /// CMI smoothing pseudo-count.
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[command(flatten)]
    pub smoothing: SmoothingArgs,
    #[arg(long, value_enum, default_value = "other-parents")]
    pub cmi_given: ConditioningArg,
    #[arg(long)]
    pub out: PathBuf,
    /// Directory for edge and effect tables.
    #[arg(long)]
    pub plot_dir: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "structured")]
    pub format: FormatArg,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// `paper-shaped`, `copy-pair` or a path to an SCM document.
    #[arg(long)]
    pub spec: String,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write exact per-edge ACE and CMI here.
    #[arg(long)]
    pub truths: Option<PathBuf>,
    /// Also write the resolved SCM document.
    #[arg(long)]
    pub write_spec: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "structured")]
    pub format: FormatArg,
}

/// Parses a full argument vector, program name first.
pub fn parse_args<I, T>(argv: I) -> Result<RunConfig, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    RunConfig::try_parse_from(argv)
}
