//! The fifteen physical image features.
//!
//! Value scales, fixed once here so results are reproducible:
//!
//! | feature | input |
//! |---|---|
//! | F1, F2 (saturation / brightness mean) | HSV `S`, `V` on `0..=1` |
//! | F13 (hue variance) | HSV hue in degrees |
//! | F3 (Laplacian variance), F6 (DCT variance) | grayscale on `0..=255` |
//! | F4, F5 (Sobel magnitude mean / std) | grayscale on `0..=1` |
//! | F7 (residual noise variance) | denoised on `0..=255`, residual divided by 255 |
//! | F8, F14 (LBP entropy, Canny density) | grayscale on `0..=255` |
//! | F11, F12 (chroma entropies) | Cr, Cb rounded to integers |

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::imgproc::{
    self, canny, dct8x8, gaussian_blur, laplacian, lbp_codes, nlm_denoise, rgb_to_hsv, rgb_to_ycrcb,
    sobel_xy, to_grayscale, CannyThresholds, ColorSpace, ImageError, NlmParams, Plane, Raster,
    ScaleTag,
};
use crate::stats::{self, entropy_bits, excess_kurtosis_guarded, pearson_guarded, Histogram256, StatsError};

pub const FEATURE_COUNT: usize = 15;

#[derive(thiserror::Error, Debug, Clone, PartialEq)]
pub enum FeatureError {
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("unknown feature name `{0}`")]
    UnknownFeature(String),
    #[error("invalid extraction config: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, FeatureError>;

/// The fifteen features, in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Feature {
    SaturationMean,
    BrightnessMean,
    LaplacianVariance,
    SobelMagnitudeMean,
    SobelMagnitudeStd,
    DctVariance,
    ResidualNoiseVariance,
    LbpEntropy,
    RgCorrelation,
    RbCorrelation,
    ChromaEntropyCr,
    ChromaEntropyCb,
    HueVariance,
    CannyEdgeDensity,
    BlueChannelKurtosis,
}

impl Feature {
    pub const ALL: [Feature; FEATURE_COUNT] = [
        Feature::SaturationMean,
        Feature::BrightnessMean,
        Feature::LaplacianVariance,
        Feature::SobelMagnitudeMean,
        Feature::SobelMagnitudeStd,
        Feature::DctVariance,
        Feature::ResidualNoiseVariance,
        Feature::LbpEntropy,
        Feature::RgCorrelation,
        Feature::RbCorrelation,
        Feature::ChromaEntropyCr,
        Feature::ChromaEntropyCb,
        Feature::HueVariance,
        Feature::CannyEdgeDensity,
        Feature::BlueChannelKurtosis,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Canonical snake_case identifier, as used in table headers.
    pub fn name(self) -> &'static str {
        match self {
            Feature::SaturationMean => "saturation_mean",
            Feature::BrightnessMean => "brightness_mean",
            Feature::LaplacianVariance => "laplacian_variance",
            Feature::SobelMagnitudeMean => "sobel_magnitude_mean",
            Feature::SobelMagnitudeStd => "sobel_magnitude_std",
            Feature::DctVariance => "dct_variance",
            Feature::ResidualNoiseVariance => "residual_noise_variance",
            Feature::LbpEntropy => "lbp_entropy",
            Feature::RgCorrelation => "rg_correlation",
            Feature::RbCorrelation => "rb_correlation",
            Feature::ChromaEntropyCr => "chroma_entropy_cr",
            Feature::ChromaEntropyCb => "chroma_entropy_cb",
            Feature::HueVariance => "hue_variance",
            Feature::CannyEdgeDensity => "canny_edge_density",
            Feature::BlueChannelKurtosis => "blue_channel_kurtosis",
        }
    }

    /// Name with underscores replaced by spaces.
    pub fn display_name(self) -> String {
        self.name().replace('_', " ")
    }

    pub fn from_name(name: &str) -> Result<Feature> {
        Feature::ALL
            .into_iter()
            .find(|f| f.name() == name)
            .ok_or_else(|| FeatureError::UnknownFeature(name.to_string()))
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Set of features whose value came from a degenerate-input guard.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct DegenerateFlags(u16);

impl DegenerateFlags {
    pub fn insert(&mut self, f: Feature) {
        self.0 |= 1 << f.index();
    }

    pub fn contains(self, f: Feature) -> bool {
        self.0 & (1 << f.index()) != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = Feature> {
        Feature::ALL.into_iter().filter(move |f| self.contains(*f))
    }
}

impl FromIterator<Feature> for DegenerateFlags {
    fn from_iter<I: IntoIterator<Item = Feature>>(iter: I) -> Self {
        let mut flags = DegenerateFlags::default();
        iter.into_iter().for_each(|f| flags.insert(f));
        flags
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: [f64; FEATURE_COUNT],
    pub degenerate: DegenerateFlags,
}

impl FeatureVector {
    pub fn get(&self, f: Feature) -> f64 {
        self.values[f.index()]
    }

    pub fn names() -> [&'static str; FEATURE_COUNT] {
        Feature::ALL.map(Feature::name)
    }
}

/// How the residual-noise feature estimates the clean image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Denoiser {
    NonLocalMeans(NlmParams),
    /// 5x5 Gaussian with sigma 1.5. Much faster; F7 values are not
    /// comparable with the non-local means variant.
    FastGaussian,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtractConfig {
    pub dct_blocks: usize,
    /// Include the DC coefficient in the per-block DCT variance.
    pub dct_include_dc: bool,
    pub denoiser: Denoiser,
    pub canny: CannyThresholds,
    pub rng_seed: u64,
}

impl Default for ExtractConfig {
    fn default() -> Self {
        Self {
            dct_blocks: 1000,
            dct_include_dc: true,
            denoiser: Denoiser::NonLocalMeans(NlmParams::default()),
            canny: CannyThresholds::default(),
            rng_seed: 42,
        }
    }
}

impl ExtractConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dct_blocks == 0 {
            return Err(FeatureError::InvalidConfig("dct_blocks must be at least 1".into()));
        }
        if let Denoiser::NonLocalMeans(p) = self.denoiser {
            p.validate()?;
        }
        if !(self.canny.low < self.canny.high) {
            return Err(ImageError::InvalidThresholds { low: self.canny.low, high: self.canny.high }.into());
        }
        Ok(())
    }
}

/// Computes F1..F15 for an RGB raster. Deterministic in `(img, cfg)`.
pub fn extract_all(img: &Raster, cfg: &ExtractConfig) -> Result<FeatureVector> {
    cfg.validate()?;
    if img.space() != ColorSpace::Rgb {
        return Err(FeatureError::InvalidConfig("extract_all needs an RGB raster".into()));
    }
    if img.width() < imgproc::MIN_DIM || img.height() < imgproc::MIN_DIM {
        return Err(ImageError::TooSmall { width: img.width(), height: img.height() }.into());
    }
    let hsv = rgb_to_hsv(img);
    let ycrcb = rgb_to_ycrcb(img);
    let g_u8 = to_grayscale(img, ScaleTag::U8);
    let g_unit = to_grayscale(img, ScaleTag::Unit);

    let mut v = [0.0; FEATURE_COUNT];
    let mut flags = DegenerateFlags::default();
    let (f1, f2, f13) = color_stats(&hsv);
    let (f3, f4, f5) = gradient_stats(&g_unit, &g_u8);
    let ((f9, d9), (f10, d10)) = channel_correlations(img)?;
    let (f11, f12) = chroma_entropies(&ycrcb)?;
    let (f15, d15) = blue_kurtosis(img)?;
    v[0] = f1;
    v[1] = f2;
    v[2] = f3;
    v[3] = f4;
    v[4] = f5;
    v[5] = dct_variance(&g_u8, cfg.dct_blocks, cfg.rng_seed, cfg.dct_include_dc)?;
    v[6] = residual_noise_variance(&g_u8, cfg.denoiser)?;
    v[7] = texture_entropy(&g_u8)?;
    v[8] = f9;
    v[9] = f10;
    v[10] = f11;
    v[11] = f12;
    v[12] = f13;
    v[13] = edge_density(&g_u8, cfg.canny)?;
    v[14] = f15;
    for (flag, f) in [(d9, Feature::RgCorrelation), (d10, Feature::RbCorrelation), (d15, Feature::BlueChannelKurtosis)] {
        if flag {
            flags.insert(f);
        }
    }
    Ok(FeatureVector { values: v, degenerate: flags })
}

/// F1 mean saturation, F2 mean value (brightness), F13 `log(1 + Var(hue))`.
pub fn color_stats(hsv: &Raster) -> (f64, f64, f64) {
    assert_eq!(hsv.space(), ColorSpace::Hsv);
    let hue = stats::moments(hsv.channel(0).values()).expect("raster is non-empty");
    let s = stats::mean(hsv.channel(1).values()).expect("raster is non-empty");
    let v = stats::mean(hsv.channel(2).values()).expect("raster is non-empty");
    (s.clamp(0.0, 1.0), v.clamp(0.0, 1.0), hue.var.ln_1p())
}

/// F3 from the Laplacian of the U8 grayscale; F4, F5 from the Sobel magnitude
/// of the unit grayscale, scaled by 10.
pub fn gradient_stats(g_unit: &Plane, g_u8: &Plane) -> (f64, f64, f64) {
    let lap = stats::moments(laplacian(g_u8).values()).expect("plane is non-empty");
    let (sx, sy) = sobel_xy(g_unit);
    let mag: Vec<f64> = sx.values().iter().zip(sy.values()).map(|(a, b)| a.hypot(*b)).collect();
    let m = stats::moments(&mag).expect("plane is non-empty");
    (lap.var.ln_1p(), 10.0 * m.mean, 10.0 * m.std)
}

/// Non-overlapping 8x8 grid blocks, row-major, as top-left corners.
pub fn grid_blocks(width: usize, height: usize) -> Vec<(usize, usize)> {
    (0..height / 8).flat_map(|by| (0..width / 8).map(move |bx| (bx * 8, by * 8))).collect()
}

/// Indices of the blocks used for F6: all of them when there are at most
/// `n_blocks`, otherwise the first `n_blocks` of a seeded partial Fisher-Yates shuffle.
pub fn sample_block_indices(count: usize, n_blocks: usize, seed: u64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..count).collect();
    if count <= n_blocks {
        return idx;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..n_blocks {
        let j = rng.random_range(i..count);
        idx.swap(i, j);
    }
    idx.truncate(n_blocks);
    idx
}

/// F6: `log(1 + mean over sampled blocks of Var(DCT(block)))`.
pub fn dct_variance(g_u8: &Plane, n_blocks: usize, seed: u64, include_dc: bool) -> Result<f64> {
    if g_u8.width() < 8 || g_u8.height() < 8 {
        return Err(ImageError::TooSmall { width: g_u8.width(), height: g_u8.height() }.into());
    }
    if n_blocks == 0 {
        return Err(FeatureError::InvalidConfig("dct_blocks must be at least 1".into()));
    }
    let blocks = grid_blocks(g_u8.width(), g_u8.height());
    let chosen = sample_block_indices(blocks.len(), n_blocks, seed);
    let mut buf = [0.0; 64];
    let mut total = 0.0;
    for &k in &chosen {
        let (x0, y0) = blocks[k];
        for y in 0..8 {
            for x in 0..8 {
                buf[y * 8 + x] = g_u8.get(x0 + x, y0 + y);
            }
        }
        let coeffs = dct8x8(&buf)?;
        let used = if include_dc { &coeffs[..] } else { &coeffs[1..] };
        total += stats::moments(used)?.var;
    }
    Ok((total / chosen.len() as f64).ln_1p())
}

/// F7: `log(1 + 1000 Var(R))` with `R = (g - denoise(g)) / 255`.
pub fn residual_noise_variance(g_u8: &Plane, denoiser: Denoiser) -> Result<f64> {
    let clean = match denoiser {
        Denoiser::NonLocalMeans(p) => nlm_denoise(g_u8, p)?,
        Denoiser::FastGaussian => gaussian_blur(g_u8, 1.5, 2),
    };
    let residual: Vec<f64> = g_u8.values().iter().zip(clean.values()).map(|(a, b)| (a - b) / 255.0).collect();
    Ok((1000.0 * stats::moments(&residual)?.var).ln_1p())
}

/// F8: entropy in bits of the LBP code histogram.
pub fn texture_entropy(g_u8: &Plane) -> Result<f64> {
    let codes = lbp_codes(g_u8)?;
    Ok(entropy_bits(&Histogram256::from_values(codes.values()))?)
}

/// F9 = corr(R, G) and F10 = corr(R, B), each with its degenerate flag.
pub fn channel_correlations(img: &Raster) -> Result<((f64, bool), (f64, bool))> {
    let (r, g, b) = (img.channel(0).values(), img.channel(1).values(), img.channel(2).values());
    Ok((pearson_guarded(r, g)?, pearson_guarded(r, b)?))
}

/// F11 (Cr) and F12 (Cb): entropies of the rounded chroma value histograms.
pub fn chroma_entropies(ycrcb: &Raster) -> Result<(f64, f64)> {
    assert_eq!(ycrcb.space(), ColorSpace::YCrCb);
    let cr = entropy_bits(&Histogram256::from_values(ycrcb.channel(1).values()))?;
    let cb = entropy_bits(&Histogram256::from_values(ycrcb.channel(2).values()))?;
    Ok((cr, cb))
}

/// F14: fraction of Canny edge pixels.
pub fn edge_density(g_u8: &Plane, thresholds: CannyThresholds) -> Result<f64> {
    let edges = canny(g_u8, thresholds)?;
    let count = edges.values().iter().filter(|&&v| v == 255.0).count();
    Ok(count as f64 / edges.len() as f64)
}

/// F15: `log(1 + |excess kurtosis of B|)`, with its degenerate flag.
pub fn blue_kurtosis(img: &Raster) -> Result<(f64, bool)> {
    let (k, flagged) = excess_kurtosis_guarded(img.channel(2).values())?;
    Ok((k.abs().ln_1p(), flagged))
}
