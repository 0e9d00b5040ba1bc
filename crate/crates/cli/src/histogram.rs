//! Density histograms of one feature, per dataset and class.

use physcue::dataset::Label;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramSpec {
    pub feature: String,
    pub dataset_id: String,
    pub label: Label,
    pub bin_edges: Vec<f64>,
    pub densities: Vec<f64>,
    pub samples: usize,
}

impl HistogramSpec {
    pub fn bins(&self) -> usize {
        self.densities.len()
    }

    /// `sum(density * width)`, 1 up to rounding.
    pub fn mass(&self) -> f64 {
        self.densities.iter().zip(self.bin_edges.windows(2)).map(|(d, e)| d * (e[1] - e[0])).sum()
    }

    /// Centre of the highest-density bin (first one on ties).
    pub fn mode(&self) -> f64 {
        let mut best = 0;
        for (i, &d) in self.densities.iter().enumerate() {
            if d > self.densities[best] {
                best = i;
            }
        }
        (self.bin_edges[best] + self.bin_edges[best + 1]) / 2.0
    }
}

/// `bins + 1` equally spaced edges over `[lo, hi]`, or `None` when they would
/// not be strictly increasing (constant or near-constant data).
pub fn equal_edges(lo: f64, hi: f64, bins: usize) -> Option<Vec<f64>> {
    if !(hi > lo) || bins == 0 {
        return None;
    }
    let edges: Vec<f64> = (0..=bins)
        .map(|i| if i == bins { hi } else { lo + (hi - lo) * i as f64 / bins as f64 })
        .collect();
    edges.windows(2).all(|w| w[1] > w[0]).then_some(edges)
}

/// A single bin around `v` narrow enough to read as a spike.
pub fn spike_edges(v: f64) -> Vec<f64> {
    let half = (v.abs() * 1e-6).max(1e-9);
    vec![v - half, v + half]
}

/// Normalised densities of `values` over `edges`; the last bin is closed.
pub fn densities(values: &[f64], edges: &[f64]) -> Vec<f64> {
    let bins = edges.len() - 1;
    let (lo, hi) = (edges[0], edges[bins]);
    let mut counts = vec![0usize; bins];
    for &v in values {
        let mut i = (((v - lo) / (hi - lo)) * bins as f64).floor().clamp(0.0, (bins - 1) as f64) as usize;
        // the arithmetic guess can land one bin off next to an edge
        while i > 0 && v < edges[i] {
            i -= 1;
        }
        while i + 1 < bins && v >= edges[i + 1] {
            i += 1;
        }
        counts[i] += 1;
    }
    let n = values.len() as f64;
    counts.iter().zip(edges.windows(2)).map(|(&c, e)| c as f64 / (n * (e[1] - e[0]))).collect()
}

/// Real and fake histograms of one dataset on shared edges spanning both classes.
pub fn class_pair(feature: &str, dataset_id: &str, real: &[f64], fake: &[f64], bins: usize) -> [HistogramSpec; 2] {
    let all = real.iter().chain(fake);
    let lo = all.clone().copied().fold(f64::INFINITY, f64::min);
    let hi = all.copied().fold(f64::NEG_INFINITY, f64::max);
    let edges = equal_edges(lo, hi, bins).unwrap_or_else(|| spike_edges((lo + hi) / 2.0));
    let spec = |label, values: &[f64]| HistogramSpec {
        feature: feature.to_string(),
        dataset_id: dataset_id.to_string(),
        label,
        densities: densities(values, &edges),
        bin_edges: edges.clone(),
        samples: values.len(),
    };
    [spec(Label::Real, real), spec(Label::Fake, fake)]
}
