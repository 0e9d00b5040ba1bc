//! Feature stability / discriminability assessment across datasets.
//!
//! For each feature:
//!
//! * stability `Ss = clip(1 - CV)` where `CV` is the coefficient of variation
//!   of the per-dataset means (real and fake pooled);
//! * discriminability `Sd = clip((mean JMD + mean AUC) / 2)` where
//!   `JMD = |mu_real - mu_fake| / (sigma_real + sigma_fake)` and the AUC comes
//!   from a one-feature logistic regression;
//! * a class assigned from `(Ss, Sd)` by the first matching threshold rule.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::features::{Feature, FEATURE_COUNT};
use crate::stats::{self, folded_auc, logistic_fit_1d, rank_auc, Moments, StatsError};

const EPS: f64 = 1e-12;
/// JMD reported when both classes are constant but at different values.
pub const JMD_SATURATED: f64 = 1e6;

#[derive(thiserror::Error, Debug, Clone, PartialEq)]
pub enum FsdvaError {
    #[error("need at least two datasets, got {0}")]
    FewerThanTwoDatasets(usize),
    #[error("dataset `{dataset}` has {got} {class} samples, need at least 2")]
    TooFewSamples { dataset: String, class: &'static str, got: usize },
    #[error("dataset `{0}` appears more than once")]
    DuplicateDataset(String),
    #[error("row has {0} columns, expected {FEATURE_COUNT}")]
    WrongWidth(usize),
    #[error("input list is empty")]
    EmptyInput,
    #[error("list lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error(transparent)]
    Stats(#[from] StatsError),
}

pub type Result<T> = std::result::Result<T, FsdvaError>;

/// Feature matrices of one dataset, rows are images.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetFeatures {
    pub dataset_id: String,
    pub real: Vec<[f64; FEATURE_COUNT]>,
    pub fake: Vec<[f64; FEATURE_COUNT]>,
}

impl DatasetFeatures {
    fn column(rows: &[[f64; FEATURE_COUNT]], f: usize) -> Vec<f64> {
        rows.iter().map(|r| r[f]).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FeatureClass {
    CoreFeature,
    UsableFeature,
    UnstableHighDiscrim,
    UnusableFeature,
}

impl FeatureClass {
    pub const ALL: [FeatureClass; 4] = [
        FeatureClass::CoreFeature,
        FeatureClass::UsableFeature,
        FeatureClass::UnstableHighDiscrim,
        FeatureClass::UnusableFeature,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureClass::CoreFeature => "CoreFeature",
            FeatureClass::UsableFeature => "UsableFeature",
            FeatureClass::UnstableHighDiscrim => "UnstableHighDiscrim",
            FeatureClass::UnusableFeature => "UnusableFeature",
        }
    }
}

impl fmt::Display for FeatureClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FeatureClass {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        FeatureClass::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown feature class `{s}`"))
    }
}

/// Class boundaries. Defaults are 0.7/0.5 (core), 0.45/0.3 (usable), 0.7/0.4 (unstable).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub core_ss: f64,
    pub core_sd: f64,
    pub usable_ss: f64,
    pub usable_sd: f64,
    /// Features with `Ss` below this can be unstable-but-discriminative.
    pub unstable_ss: f64,
    pub unstable_sd: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { core_ss: 0.7, core_sd: 0.5, usable_ss: 0.45, usable_sd: 0.3, unstable_ss: 0.7, unstable_sd: 0.4 }
    }
}

/// First matching rule wins: core, usable, unstable-high-discrim, unusable.
pub fn classify(ss: f64, sd: f64, t: &Thresholds) -> FeatureClass {
    if ss >= t.core_ss && sd >= t.core_sd {
        FeatureClass::CoreFeature
    } else if ss >= t.usable_ss && sd >= t.usable_sd {
        FeatureClass::UsableFeature
    } else if ss < t.unstable_ss && sd >= t.unstable_sd {
        FeatureClass::UnstableHighDiscrim
    } else {
        FeatureClass::UnusableFeature
    }
}

fn clip01(v: f64) -> f64 {
    v.clamp(0.0, 1.0)
}

/// Returns `(CV, Ss)` for one feature's per-dataset means.
///
/// `CV = sigma / |mu|` (population sigma). When `|mu|` vanishes the score is 1
/// if the means are also all equal and 0 otherwise.
pub fn stability_score(dataset_means: &[f64]) -> Result<(f64, f64)> {
    if dataset_means.len() < 2 {
        return Err(FsdvaError::FewerThanTwoDatasets(dataset_means.len()));
    }
    let m = stats::moments(dataset_means)?;
    if m.mean.abs() < EPS {
        return Ok(if m.std < EPS { (0.0, 1.0) } else { (f64::INFINITY, 0.0) });
    }
    let cv = m.std / m.mean.abs();
    Ok((cv, clip01(1.0 - cv)))
}

/// `|mu_real - mu_fake| / (sigma_real + sigma_fake)`.
pub fn jmd(real: &Moments, fake: &Moments) -> f64 {
    let gap = (real.mean - fake.mean).abs();
    let denom = real.std + fake.std;
    if denom < EPS {
        if gap < EPS {
            0.0
        } else {
            JMD_SATURATED
        }
    } else {
        gap / denom
    }
}

/// `clip((mean(jmds) + mean(aucs)) / 2)`.
pub fn discriminability_score(jmds: &[f64], aucs: &[f64]) -> Result<f64> {
    if jmds.len() != aucs.len() {
        return Err(FsdvaError::LengthMismatch(jmds.len(), aucs.len()));
    }
    if jmds.is_empty() {
        return Err(FsdvaError::EmptyInput);
    }
    let n = jmds.len() as f64;
    let mj = jmds.iter().sum::<f64>() / n;
    let ma = aucs.iter().sum::<f64>() / n;
    Ok(clip01((mj + ma) / 2.0))
}

/// Per-dataset breakdown of one feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMetric {
    pub dataset_id: String,
    /// Mean over real and fake samples pooled.
    pub mean: f64,
    pub jmd: f64,
    /// Rank AUC folded to `max(a, 1 - a)`; absent when the dataset was skipped.
    pub auc: Option<f64>,
    /// Unfolded rank AUC, fake as the positive class.
    pub raw_auc: f64,
    /// ROC AUC of the fitted logistic model's scores.
    pub model_auc: Option<f64>,
    pub skipped: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMetrics {
    #[serde(rename = "name")]
    pub feature: String,
    pub stability: f64,
    pub discriminability: f64,
    pub cv: f64,
    pub mean_jmd: f64,
    pub mean_auc: f64,
    pub class: FeatureClass,
    /// Set when every dataset was skipped for this feature.
    pub all_skipped: bool,
    pub per_dataset: Vec<DatasetMetric>,
}

fn validate(datasets: &[DatasetFeatures]) -> Result<()> {
    if datasets.len() < 2 {
        return Err(FsdvaError::FewerThanTwoDatasets(datasets.len()));
    }
    let mut seen = std::collections::BTreeSet::new();
    for d in datasets {
        if !seen.insert(d.dataset_id.as_str()) {
            return Err(FsdvaError::DuplicateDataset(d.dataset_id.clone()));
        }
        for (class, rows) in [("real", &d.real), ("fake", &d.fake)] {
            if rows.len() < 2 {
                return Err(FsdvaError::TooFewSamples { dataset: d.dataset_id.clone(), class, got: rows.len() });
            }
        }
    }
    Ok(())
}

fn dataset_metric(d: &DatasetFeatures, f: usize) -> Result<DatasetMetric> {
    let real = DatasetFeatures::column(&d.real, f);
    let fake = DatasetFeatures::column(&d.fake, f);
    let pooled: Vec<f64> = real.iter().chain(&fake).copied().collect();
    let mean = stats::mean(&pooled)?;
    let (mr, mf) = (stats::moments(&real)?, stats::moments(&fake)?);
    let jmd = jmd(&mr, &mf);
    let raw_auc = rank_auc(&real, &fake)?;
    let labels: Vec<bool> = (0..pooled.len()).map(|i| i >= real.len()).collect();
    let (auc, model_auc, skipped) = match logistic_fit_1d(&pooled, &labels) {
        Ok(model) => (Some(folded_auc(raw_auc)), Some(model.score_auc(&real, &fake)?), None),
        Err(e) => (None, None, Some(e.to_string())),
    };
    Ok(DatasetMetric { dataset_id: d.dataset_id.clone(), mean, jmd, auc, raw_auc, model_auc, skipped })
}

fn feature_metrics(f: Feature, per_dataset: Vec<DatasetMetric>, t: &Thresholds) -> Result<FeatureMetrics> {
    let means: Vec<f64> = per_dataset.iter().map(|m| m.mean).collect();
    let (cv, ss) = stability_score(&means)?;
    let used: Vec<&DatasetMetric> = per_dataset.iter().filter(|m| m.auc.is_some()).collect();
    let (sd, mean_jmd, mean_auc, class, all_skipped) = if used.is_empty() {
        (0.0, 0.0, 0.0, FeatureClass::UnusableFeature, true)
    } else {
        let jmds: Vec<f64> = used.iter().map(|m| m.jmd).collect();
        let aucs: Vec<f64> = used.iter().filter_map(|m| m.auc).collect();
        let sd = discriminability_score(&jmds, &aucs)?;
        let n = used.len() as f64;
        (sd, jmds.iter().sum::<f64>() / n, aucs.iter().sum::<f64>() / n, classify(ss, sd, t), false)
    };
    Ok(FeatureMetrics {
        feature: f.name().to_string(),
        stability: ss,
        discriminability: sd,
        cv,
        mean_jmd,
        mean_auc,
        class,
        all_skipped,
        per_dataset,
    })
}

/// Scores all fifteen features across the datasets, in canonical feature order.
///
/// Datasets are processed sorted by id, so the result does not depend on the
/// order they are passed in. A dataset whose logistic fit fails for a feature
/// (for example a constant column) is skipped for that feature's `Sd`.
pub fn run_fsdva(datasets: &[DatasetFeatures], thresholds: &Thresholds) -> Result<Vec<FeatureMetrics>> {
    validate(datasets)?;
    let mut sorted: Vec<&DatasetFeatures> = datasets.iter().collect();
    sorted.sort_by(|a, b| a.dataset_id.cmp(&b.dataset_id));

    let cells: Vec<((usize, usize), Result<DatasetMetric>)> = (0..FEATURE_COUNT)
        .flat_map(|f| (0..sorted.len()).map(move |d| (f, d)))
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(f, d)| ((f, d), dataset_metric(sorted[d], f)))
        .collect();
    let mut by_feature: BTreeMap<usize, Vec<DatasetMetric>> = BTreeMap::new();
    for ((f, _), m) in cells {
        by_feature.entry(f).or_default().push(m?);
    }
    Feature::ALL
        .into_iter()
        .map(|f| feature_metrics(f, by_feature.remove(&f.index()).unwrap_or_default(), thresholds))
        .collect()
}

/// Names of the features classified as core, in canonical order.
pub fn core_features(metrics: &[FeatureMetrics]) -> Vec<String> {
    metrics.iter().filter(|m| m.class == FeatureClass::CoreFeature).map(|m| m.feature.clone()).collect()
}
