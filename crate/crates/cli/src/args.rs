use std::num::NonZeroUsize;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use physcue::caption::Phrase;
use physcue::features::Denoiser;
use physcue::imgproc::{CannyThresholds, NlmParams};
use physcue::{ExtractConfig, Thresholds};

use crate::error::CliError;

#[derive(Parser, Debug, Clone)]
#[command(name = "physcue", version, about = "Physical image features: extraction, assessment, captions and plots")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalArgs {
    /// Seed for sampling and DCT block selection.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Worker threads for extraction (default: available cores).
    #[arg(long, global = true)]
    pub workers: Option<NonZeroUsize>,
    #[arg(long, short, global = true)]
    pub verbose: bool,
}

impl Default for GlobalArgs {
    fn default() -> Self {
        Self { seed: 42, workers: None, verbose: false }
    }
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Sample a manifest and write the feature table.
    Extract(ExtractArgs),
    /// Score features for stability and discriminability across datasets.
    Assess(AssessArgs),
    /// Append core-feature descriptions to base captions.
    Caption(CaptionArgs),
    /// Per-dataset density histograms of one feature.
    Plot(PlotArgs),
}

#[derive(Args, Debug, Clone)]
pub struct ExtractArgs {
    /// CSV with columns path,label,dataset.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Output feature table (CSV). The run manifest goes to `<out>.run.json`.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 6000, value_parser = clap::value_parser!(u64).range(1..))]
    pub sample_per_class: u64,
    /// Directory relative image paths are resolved against (default: the manifest's).
    #[arg(long)]
    pub base_dir: Option<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    pub dct_blocks: usize,
    /// Leave the DC coefficient out of the DCT variance.
    #[arg(long)]
    pub dct_exclude_dc: bool,
    /// Use a 5x5 Gaussian instead of non-local means for the noise residual.
    #[arg(long)]
    pub fast_denoise: bool,
    #[arg(long, default_value_t = 10.0)]
    pub nlm_h: f64,
    #[arg(long, default_value_t = 7)]
    pub nlm_patch: usize,
    #[arg(long, default_value_t = 21)]
    pub nlm_search: usize,
    #[arg(long, default_value_t = 100.0)]
    pub canny_low: f64,
    #[arg(long, default_value_t = 200.0)]
    pub canny_high: f64,
}

impl ExtractArgs {
    pub fn extract_config(&self, seed: u64) -> Result<ExtractConfig, CliError> {
        let denoiser = if self.fast_denoise {
            Denoiser::FastGaussian
        } else {
            Denoiser::NonLocalMeans(NlmParams { h: self.nlm_h, patch: self.nlm_patch, search: self.nlm_search })
        };
        let cfg = ExtractConfig {
            dct_blocks: self.dct_blocks,
            dct_include_dc: !self.dct_exclude_dc,
            denoiser,
            canny: CannyThresholds { low: self.canny_low, high: self.canny_high },
            rng_seed: seed,
        };
        cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(cfg)
    }
}

#[derive(Args, Debug, Clone)]
pub struct ThresholdArgs {
    #[arg(long, default_value_t = 0.7)]
    pub core_threshold_ss: f64,
    #[arg(long, default_value_t = 0.5)]
    pub core_threshold_sd: f64,
    #[arg(long, default_value_t = 0.45)]
    pub usable_threshold_ss: f64,
    #[arg(long, default_value_t = 0.3)]
    pub usable_threshold_sd: f64,
    #[arg(long, default_value_t = 0.7)]
    pub unstable_threshold_ss: f64,
    #[arg(long, default_value_t = 0.4)]
    pub unstable_threshold_sd: f64,
}

impl Default for ThresholdArgs {
    fn default() -> Self {
        let t = Thresholds::default();
        Self {
            core_threshold_ss: t.core_ss,
            core_threshold_sd: t.core_sd,
            usable_threshold_ss: t.usable_ss,
            usable_threshold_sd: t.usable_sd,
            unstable_threshold_ss: t.unstable_ss,
            unstable_threshold_sd: t.unstable_sd,
        }
    }
}

impl ThresholdArgs {
    pub fn thresholds(&self) -> Result<Thresholds, CliError> {
        let t = Thresholds {
            core_ss: self.core_threshold_ss,
            core_sd: self.core_threshold_sd,
            usable_ss: self.usable_threshold_ss,
            usable_sd: self.usable_threshold_sd,
            unstable_ss: self.unstable_threshold_ss,
            unstable_sd: self.unstable_threshold_sd,
        };
        let all = [t.core_ss, t.core_sd, t.usable_ss, t.usable_sd, t.unstable_ss, t.unstable_sd];
        if all.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(CliError::Usage("thresholds must lie in [0, 1]".into()));
        }
        Ok(t)
    }
}

#[derive(Args, Debug, Clone)]
pub struct AssessArgs {
    /// One or more feature tables; rows are merged.
    #[arg(long, required = true, num_args = 1..)]
    pub features: Vec<PathBuf>,
    /// Metrics JSON output.
    #[arg(long)]
    pub out: PathBuf,
    /// Metrics CSV output (default: `--out` with a .csv extension).
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Also write a two-panel stability/discriminability bar chart (SVG).
    #[arg(long)]
    pub plot: Option<PathBuf>,
    #[command(flatten)]
    pub thresholds: ThresholdArgs,
}

#[derive(Args, Debug, Clone)]
pub struct CaptionArgs {
    #[arg(long)]
    pub features: PathBuf,
    /// JSONL with keys `path` and `caption`.
    #[arg(long)]
    pub captions: PathBuf,
    /// Take the core set from an `assess` metrics JSON.
    #[arg(long, conflicts_with = "core")]
    pub metrics: Option<PathBuf>,
    /// Comma-separated core feature names (default: the four gradient/texture features).
    #[arg(long, value_delimiter = ',')]
    pub core: Vec<String>,
    /// Caption JSONL output. The run manifest goes to `<out>.run.json`.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = Phrase::Physical)]
    pub phrase: Phrase,
    #[arg(long, default_value_t = 2)]
    pub decimals: u32,
}

#[derive(Args, Debug, Clone)]
pub struct PlotArgs {
    #[arg(long)]
    pub features: PathBuf,
    /// Canonical feature name, e.g. `lbp_entropy`.
    #[arg(long)]
    pub feature: String,
    /// SVG output.
    #[arg(long)]
    pub out: PathBuf,
    /// Histogram JSON output (default: `--out` with a .json extension).
    #[arg(long)]
    pub json: Option<PathBuf>,
    #[arg(long, default_value_t = 50, value_parser = clap::value_parser!(u64).range(1..))]
    pub bins: u64,
}
