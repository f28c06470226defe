use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use deeplrr::config::SolverConfig;
use deeplrr::synth::SynthSpec;
use deeplrr::MatrixFormat;

use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(
    name = "deeplrr",
    version,
    about = "Multilayer low-rank representation for deep subspace clustering"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate the synthetic union-of-subspaces dataset.
    Synth(SynthArgs),
    /// Train a multilayer model on a data matrix.
    Train(TrainArgs),
    /// Spectral clustering on one layer of a trained model.
    Cluster(ClusterArgs),
    /// Cartesian parameter sweep with clustering metrics per cell.
    Grid(GridArgs),
    /// Render a matrix as a binary PGM image.
    Heatmap(HeatmapArgs),
    /// Synthesize, train, cluster, evaluate and render in one run.
    Pipeline(PipelineArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Binary,
}

impl From<FormatArg> for MatrixFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => MatrixFormat::Csv,
            FormatArg::Binary => MatrixFormat::Binary,
        }
    }
}

/// Solver configuration flags. Precedence: flags, then `--config`, then defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// `key = value` configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub layers: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub lambda1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub rho: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub mu0: Option<f64>,
    #[arg(long = "mu-max", allow_negative_numbers = true)]
    pub mu_max: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub eta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub eps: Option<f64>,
    #[arg(long = "max-iter")]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub clusters: Option<usize>,
    #[arg(long = "kmeans-restarts")]
    pub kmeans_restarts: Option<usize>,
}

fn read_config_file(path: &PathBuf, cfg: &mut SolverConfig) -> CliResult<()> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    cfg.apply_text(&text)?;
    Ok(())
}

impl ConfigArgs {
    pub fn resolve(&self) -> CliResult<SolverConfig> {
        let mut cfg = SolverConfig::default();
        if let Some(path) = &self.config {
            read_config_file(path, &mut cfg)?;
        }
        macro_rules! overlay {
            ($($field:ident),*) => {
                $(if let Some(v) = self.$field { cfg.$field = v; })*
            };
        }
        overlay!(
            layers,
            alpha,
            lambda1,
            rho,
            mu0,
            mu_max,
            eta,
            eps,
            max_iter,
            seed,
            clusters,
            kmeans_restarts
        );
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Args)]
pub struct SynthParams {
    #[arg(long = "ambient-dim", default_value_t = 200)]
    pub ambient_dim: usize,
    #[arg(long = "subspace-dim", default_value_t = 10)]
    pub subspace_dim: usize,
    #[arg(long, default_value_t = 10)]
    pub subspaces: usize,
    #[arg(long = "samples-per-subspace", default_value_t = 9)]
    pub samples_per_subspace: usize,
    /// Variance of the additive Gaussian noise on the raw data.
    #[arg(long = "noise-variance", default_value_t = 0.1, allow_negative_numbers = true)]
    pub noise_variance: f64,
    /// Extra Gaussian corruption, variance on the 0-255 gray scale.
    #[arg(long = "gaussian-noise", allow_negative_numbers = true)]
    pub gaussian_noise: Option<f64>,
    /// Clamp Gaussian-corrupted data to [0, 1].
    #[arg(long)]
    pub clamp: bool,
    /// Fraction of entries replaced by uniform [0, 1) values.
    #[arg(long = "corrupt-pixels", allow_negative_numbers = true)]
    pub corrupt_pixels: Option<f64>,
}

impl SynthParams {
    pub fn spec(&self, seed: u64) -> SynthSpec {
        SynthSpec {
            ambient_dim: self.ambient_dim,
            subspace_dim: self.subspace_dim,
            n_subspaces: self.subspaces,
            samples_per_subspace: self.samples_per_subspace,
            noise_variance: self.noise_variance,
            seed,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    #[command(flatten)]
    pub params: SynthParams,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = FormatArg::Binary)]
    pub format: FormatArg,
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Input format; inferred from the extension when omitted.
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    /// Model output directory.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub config: ConfigArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ClusterArgs {
    /// Trained model directory.
    #[arg(long)]
    pub model: PathBuf,
    /// 1-based layer index; defaults to the deepest layer.
    #[arg(long)]
    pub layer: Option<usize>,
    #[arg(long)]
    pub clusters: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long = "kmeans-restarts")]
    pub kmeans_restarts: Option<usize>,
    /// Ground-truth labels; enables `metrics.csv`.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Clustering repetitions with seeds seed, seed+1, ...
    #[arg(long, default_value_t = 1)]
    pub repeat: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    #[arg(long)]
    pub truth: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_delimiter = ',', num_args = 1.., allow_negative_numbers = true)]
    pub lambda1: Vec<f64>,
    #[arg(long, value_delimiter = ',', num_args = 1.., allow_negative_numbers = true)]
    pub alpha: Vec<f64>,
    #[arg(long, value_delimiter = ',', num_args = 1.., allow_negative_numbers = true)]
    pub rho: Vec<f64>,
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub layers: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    pub repeat: usize,
    /// Base configuration for everything not swept.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub clusters: Option<usize>,
    #[arg(long = "kmeans-restarts")]
    pub kmeans_restarts: Option<usize>,
    #[arg(long = "max-iter")]
    pub max_iter: Option<usize>,
}

impl GridArgs {
    pub fn base_config(&self) -> CliResult<SolverConfig> {
        ConfigArgs {
            config: self.config.clone(),
            seed: self.seed,
            clusters: self.clusters,
            kmeans_restarts: self.kmeans_restarts,
            max_iter: self.max_iter,
            ..ConfigArgs::default()
        }
        .resolve()
    }
}

#[derive(Debug, Clone, Args)]
pub struct HeatmapArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    /// Output `.pgm` path.
    #[arg(long)]
    pub out: PathBuf,
    /// Render `(|M| + |M^T|) / 2` instead of `|M|`.
    #[arg(long)]
    pub affinity: bool,
}

#[derive(Debug, Clone, Args)]
pub struct PipelineArgs {
    #[command(flatten)]
    pub synth: SynthParams,
    #[command(flatten)]
    pub config: ConfigArgs,
    #[arg(long, default_value_t = 1)]
    pub repeat: usize,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = FormatArg::Binary)]
    pub format: FormatArg,
}

pub fn input_format(path: &std::path::Path, explicit: Option<FormatArg>) -> MatrixFormat {
    explicit.map_or_else(|| MatrixFormat::from_path(path), MatrixFormat::from)
}
