//! Physical image features for real-vs-synthetic image analysis.
//!
//! * [`imgproc`]: decoding, color conversion and filter kernels.
//! * [`stats`]: moments, entropy, rank AUC, one-feature logistic regression.
//! * [`features`]: the fifteen per-image features.
//! * [`fsdva`]: cross-dataset stability and discriminability scoring.
//! * [`dataset`]: manifests, sampling, parallel extraction, feature tables.
//! * [`caption`]: feature descriptions appended to captions.

pub mod caption;
pub mod dataset;
pub mod features;
pub mod fsdva;
pub mod imgproc;
pub mod stats;

pub use features::{extract_all, ExtractConfig, Feature, FeatureVector, FEATURE_COUNT};
pub use fsdva::{run_fsdva, FeatureClass, FeatureMetrics, Thresholds};
