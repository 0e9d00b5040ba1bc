//! Feature descriptions appended to image captions.
//!
//! `feature_text` renders selected feature values as
//! `The physical features are: laplacian variance 5.23, lbp entropy 6.41.`
//! and `enhance` joins that onto a base caption.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::features::{Feature, FeatureError, FeatureVector};

/// Version tag of the feature-text wording and number format.
pub const CAPTION_FORMAT_VERSION: u32 = 1;
pub const MAX_DECIMALS: u32 = 6;

#[derive(thiserror::Error, Debug, Clone, PartialEq)]
pub enum CaptionError {
    #[error(transparent)]
    UnknownFeatureName(#[from] FeatureError),
    #[error("the core feature set is empty")]
    EmptyCoreSet,
    #[error("decimals must be in 0..={MAX_DECIMALS}, got {0}")]
    InvalidDecimals(u32),
    #[error("unknown phrase `{0}` (expected physical or major)")]
    UnknownPhrase(String),
}

pub type Result<T> = std::result::Result<T, CaptionError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phrase {
    #[default]
    Physical,
    Major,
}

impl Phrase {
    pub fn text(self) -> &'static str {
        match self {
            Phrase::Physical => "The physical features are:",
            Phrase::Major => "The major features are:",
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Phrase::Physical => "physical",
            Phrase::Major => "major",
        }
    }
}

impl fmt::Display for Phrase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Phrase {
    type Err = CaptionError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "physical" => Ok(Phrase::Physical),
            "major" => Ok(Phrase::Major),
            other => Err(CaptionError::UnknownPhrase(other.to_string())),
        }
    }
}

/// The four gradient/texture features used when no assessment result is supplied.
pub const DEFAULT_CORE_SET: [Feature; 4] = [
    Feature::LaplacianVariance,
    Feature::SobelMagnitudeMean,
    Feature::SobelMagnitudeStd,
    Feature::LbpEntropy,
];

#[derive(Debug, Clone, PartialEq)]
pub struct CaptionConfig {
    phrase: Phrase,
    decimals: u32,
    core_set: Vec<Feature>,
}

impl Default for CaptionConfig {
    fn default() -> Self {
        Self { phrase: Phrase::Physical, decimals: 2, core_set: DEFAULT_CORE_SET.to_vec() }
    }
}

impl CaptionConfig {
    /// Validates and canonicalises the core set (canonical feature order, no repeats).
    pub fn new(phrase: Phrase, decimals: u32, core_set: &[Feature]) -> Result<Self> {
        if decimals > MAX_DECIMALS {
            return Err(CaptionError::InvalidDecimals(decimals));
        }
        if core_set.is_empty() {
            return Err(CaptionError::EmptyCoreSet);
        }
        let mut core_set = core_set.to_vec();
        core_set.sort();
        core_set.dedup();
        Ok(Self { phrase, decimals, core_set })
    }

    pub fn from_names<S: AsRef<str>>(phrase: Phrase, decimals: u32, names: &[S]) -> Result<Self> {
        let features = names
            .iter()
            .map(|n| Feature::from_name(n.as_ref().trim()))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Self::new(phrase, decimals, &features)
    }

    pub fn phrase(&self) -> Phrase {
        self.phrase
    }

    pub fn decimals(&self) -> u32 {
        self.decimals
    }

    pub fn core_set(&self) -> &[Feature] {
        &self.core_set
    }
}

/// Rounds half-to-even at `decimals` places, always with `.` as the separator.
///
/// Rounding acts on the exact binary value, so `0.125` gives `0.12` while
/// `0.005` (stored slightly above) gives `0.01`.
pub fn format_value(v: f64, decimals: u32) -> String {
    let s = format!("{:.*}", decimals as usize, v);
    // "-0.00" reads oddly in a caption
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

/// `<phrase> <name> <value>, <name> <value>.` over the configured core set.
pub fn feature_text(v: &FeatureVector, cfg: &CaptionConfig) -> String {
    let parts: Vec<String> = cfg
        .core_set
        .iter()
        .map(|&f| format!("{} {}", f.display_name(), format_value(v.get(f), cfg.decimals)))
        .collect();
    format!("{} {}.", cfg.phrase.text(), parts.join(", "))
}

/// Joins a base caption and a feature text with one space, terminating the
/// base with `.` unless it already ends in `.`, `!` or `?`.
pub fn enhance(base: &str, feat_text: &str) -> String {
    let base = base.trim_end();
    let feat = feat_text.trim_start();
    if base.is_empty() {
        return feat.to_string();
    }
    let mut out = String::with_capacity(base.len() + feat.len() + 2);
    out.push_str(base);
    if !base.ends_with(['.', '!', '?']) {
        out.push('.');
    }
    out.push(' ');
    out.push_str(feat);
    out
}

/// One caption line of the output JSONL.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaptionRecord {
    pub path: String,
    pub base_caption: String,
    pub feature_text: String,
    pub enhanced_caption: String,
}

impl CaptionRecord {
    pub fn build(path: &str, base: &str, v: &FeatureVector, cfg: &CaptionConfig) -> Self {
        let feature_text = feature_text(v, cfg);
        Self {
            path: path.to_string(),
            base_caption: base.to_string(),
            enhanced_caption: enhance(base, &feature_text),
            feature_text,
        }
    }
}
