//! Descriptive statistics, histogram entropy, rank AUC and a one-feature
//! logistic regression fitted by IRLS.
//!
//! Variances are population (divide-by-n) variances throughout.

use std::cmp::Ordering;

/// Below this a variance is treated as zero by the degenerate-input guards.
pub const DEGENERATE_EPS: f64 = 1e-12;

#[derive(thiserror::Error, Debug, Clone, PartialEq)]
pub enum StatsError {
    #[error("input sequence is empty")]
    EmptyInput,
    #[error("sequence lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("histogram has no counts")]
    EmptyHistogram,
    #[error("one of the classes has no samples")]
    EmptyClass,
    #[error("labels contain a single class")]
    SingleClass,
    #[error("feature is constant")]
    DegenerateFeature,
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("input contains a non-finite value")]
    NonFinite,
}

pub type Result<T> = std::result::Result<T, StatsError>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub n: usize,
    pub mean: f64,
    pub var: f64,
    pub std: f64,
}

fn check_finite(xs: &[f64]) -> Result<()> {
    if xs.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(StatsError::NonFinite)
    }
}

pub fn mean(xs: &[f64]) -> Result<f64> {
    if xs.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    // shifted by the first value so a constant sequence returns it exactly
    let x0 = xs[0];
    Ok(x0 + xs.iter().map(|v| v - x0).sum::<f64>() / xs.len() as f64)
}

/// Two-pass population mean and variance.
pub fn moments(xs: &[f64]) -> Result<Moments> {
    check_finite(xs)?;
    let mean = mean(xs)?;
    let var = xs.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / xs.len() as f64;
    Ok(Moments { n: xs.len(), mean, var, std: var.sqrt() })
}

/// Pearson correlation, or `0.0` when either side has (near) zero variance.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    Ok(pearson_guarded(x, y)?.0)
}

/// Like [`pearson`], also reporting whether the degenerate guard fired.
pub fn pearson_guarded(x: &[f64], y: &[f64]) -> Result<(f64, bool)> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(StatsError::EmptyInput);
    }
    let (mx, my) = (moments(x)?, moments(y)?);
    if mx.var < DEGENERATE_EPS || my.var < DEGENERATE_EPS {
        return Ok((0.0, true));
    }
    let cov = x.iter().zip(y).map(|(a, b)| (a - mx.mean) * (b - my.mean)).sum::<f64>() / x.len() as f64;
    Ok(((cov / (mx.var * my.var).sqrt()).clamp(-1.0, 1.0), false))
}

/// Excess kurtosis `m4 / m2^2 - 3`, or `0.0` when `m2` is (near) zero.
pub fn excess_kurtosis(xs: &[f64]) -> Result<f64> {
    Ok(excess_kurtosis_guarded(xs)?.0)
}

pub fn excess_kurtosis_guarded(xs: &[f64]) -> Result<(f64, bool)> {
    if xs.len() < 2 {
        return Err(StatsError::EmptyInput);
    }
    let m = moments(xs)?;
    if m.var < DEGENERATE_EPS {
        return Ok((0.0, true));
    }
    let m4 = xs.iter().map(|v| (v - m.mean).powi(4)).sum::<f64>() / xs.len() as f64;
    Ok((m4 / (m.var * m.var) - 3.0, false))
}

/// Counts over 256 bins.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram256 {
    counts: [u64; 256],
    total: u64,
}

impl Default for Histogram256 {
    fn default() -> Self {
        Self { counts: [0; 256], total: 0 }
    }
}

impl Histogram256 {
    pub fn from_counts(counts: [u64; 256]) -> Self {
        Self { total: counts.iter().sum(), counts }
    }

    /// Bins each value by rounding to the nearest integer and clamping to `0..=255`.
    pub fn from_values(values: &[f64]) -> Self {
        let mut h = Self::default();
        for &v in values {
            h.add(v.round().clamp(0.0, 255.0) as usize);
        }
        h
    }

    pub fn add(&mut self, bin: usize) {
        self.counts[bin] += 1;
        self.total += 1;
    }

    pub fn counts(&self) -> &[u64; 256] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }
}

/// Shannon entropy in bits of the normalised histogram.
pub fn entropy_bits(h: &Histogram256) -> Result<f64> {
    if h.total == 0 {
        return Err(StatsError::EmptyHistogram);
    }
    let total = h.total as f64;
    let e = -h
        .counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total;
            p * p.log2()
        })
        .sum::<f64>();
    // a single occupied bin gives -0.0
    Ok(e.max(0.0))
}

/// Mann-Whitney AUC with fake as the positive class: `P(fake > real) + P(tie) / 2`.
///
/// Ties get midranks. The statistic is accumulated in integer half-units, so
/// `rank_auc(a, b) + rank_auc(b, a)` is exactly 1.
pub fn rank_auc(real: &[f64], fake: &[f64]) -> Result<f64> {
    if real.is_empty() || fake.is_empty() {
        return Err(StatsError::EmptyClass);
    }
    check_finite(real)?;
    check_finite(fake)?;
    let mut all: Vec<(f64, bool)> =
        real.iter().map(|&v| (v, false)).chain(fake.iter().map(|&v| (v, true))).collect();
    all.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal));

    // twice the rank sum of the fake class; midrank of a tie group spanning
    // 1-based ranks lo..=hi is (lo + hi) / 2
    let mut fake_rank_sum2: u128 = 0;
    let mut i = 0;
    while i < all.len() {
        let mut j = i;
        while j + 1 < all.len() && all[j + 1].0 == all[i].0 {
            j += 1;
        }
        let rank2 = (i + 1 + j + 1) as u128;
        let fakes = all[i..=j].iter().filter(|p| p.1).count() as u128;
        fake_rank_sum2 += rank2 * fakes;
        i = j + 1;
    }
    let (nr, nf) = (real.len() as u128, fake.len() as u128);
    let u_fake2 = fake_rank_sum2 - nf * (nf + 1);
    let denom2 = 2 * nr * nf;
    let u_real2 = denom2 - u_fake2;
    // Compute the smaller side directly and the larger as its complement so the
    // two orientations sum to exactly one.
    if u_fake2 <= u_real2 {
        Ok(u_fake2 as f64 / denom2 as f64)
    } else {
        Ok(1.0 - u_real2 as f64 / denom2 as f64)
    }
}

/// AUC folded so that a perfectly inverted separator also scores 1.
pub fn folded_auc(auc: f64) -> f64 {
    auc.max(1.0 - auc)
}

const RIDGE: f64 = 1e-6;
const MAX_ITER: usize = 100;
const LOGLIK_TOL: f64 = 1e-8;

/// One-feature logistic regression on the standardised midrank of the input.
///
/// Raw values are mapped to their midrank within the training sample, then
/// z-scored. The centred rank sum of the positive class is proportional to
/// `AUC - 0.5`, so the weight's sign matches the rank orientation and the
/// score AUC is `max(a, 1 - a)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticModel {
    pub weight: f64,
    pub bias: f64,
    pub converged: bool,
    pub iterations: usize,
    sorted: Vec<f64>,
    rank_mean: f64,
    rank_std: f64,
}

/// 1-based midrank of `x` among `sorted`; values between samples get the
/// half-way position.
fn midrank(sorted: &[f64], x: f64) -> f64 {
    let lo = sorted.partition_point(|&v| v < x);
    let hi = sorted.partition_point(|&v| v <= x);
    (lo + hi + 1) as f64 / 2.0
}

impl LogisticModel {
    /// Standardised midrank of a raw feature value.
    pub fn transform(&self, x: f64) -> f64 {
        (midrank(&self.sorted, x) - self.rank_mean) / self.rank_std
    }

    /// Linear predictor (log-odds) for a raw feature value.
    pub fn decision(&self, x: f64) -> f64 {
        self.weight * self.transform(x) + self.bias
    }

    pub fn probability(&self, x: f64) -> f64 {
        sigmoid(self.decision(x))
    }

    /// ROC AUC of the model scores, fake as the positive class.
    ///
    /// Ranks `weight * transform(x)`, which orders samples exactly like the
    /// probabilities but cannot collapse into ties when they saturate or when
    /// the bias dwarfs a small weight.
    pub fn score_auc(&self, real: &[f64], fake: &[f64]) -> Result<f64> {
        let score = |xs: &[f64]| -> Vec<f64> { xs.iter().map(|&x| self.weight * self.transform(x)).collect() };
        rank_auc(&score(real), &score(fake))
    }
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

// log(1 + exp(t)) without overflow
fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

fn penalized_loglik(z: &[f64], y: &[bool], w: f64, b: f64) -> f64 {
    let ll: f64 = z
        .iter()
        .zip(y)
        .map(|(&zi, &yi)| {
            let t = w * zi + b;
            if yi {
                -softplus(-t)
            } else {
                -softplus(t)
            }
        })
        .sum();
    ll - 0.5 * RIDGE * (w * w + b * b)
}

/// Fits `P(y = 1 | x) = sigmoid(w z + b)` with `z` the standardised midrank of
/// `x`, by Newton/IRLS steps on the ridge-penalised log-likelihood.
///
/// Stops after 100 iterations or when the log-likelihood changes by less than
/// `1e-8`. Steps are halved whenever they would decrease the objective.
pub fn logistic_fit_1d(x: &[f64], y: &[bool]) -> Result<LogisticModel> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 4 {
        return Err(StatsError::TooFewSamples { needed: 4, got: x.len() });
    }
    let positives = y.iter().filter(|&&v| v).count();
    if positives == 0 || positives == y.len() {
        return Err(StatsError::SingleClass);
    }
    let m = moments(x)?;
    if m.var < DEGENERATE_EPS {
        return Err(StatsError::DegenerateFeature);
    }
    let mut sorted = x.to_vec();
    sorted.sort_by(f64::total_cmp);
    let ranks: Vec<f64> = x.iter().map(|&v| midrank(&sorted, v)).collect();
    let rm = moments(&ranks)?;
    let z: Vec<f64> = ranks.iter().map(|&r| (r - rm.mean) / rm.std).collect();

    let (mut w, mut b) = (0.0f64, 0.0f64);
    let mut ll = penalized_loglik(&z, y, w, b);
    let mut converged = false;
    let mut iterations = 0;
    while iterations < MAX_ITER {
        iterations += 1;
        // gradient and (negative) Hessian of the penalised log-likelihood
        let (mut gw, mut gb) = (-RIDGE * w, -RIDGE * b);
        let (mut hww, mut hwb, mut hbb) = (RIDGE, 0.0, RIDGE);
        for (&zi, &yi) in z.iter().zip(y) {
            let p = sigmoid(w * zi + b);
            let r = if yi { 1.0 - p } else { -p };
            gw += r * zi;
            gb += r;
            let s = p * (1.0 - p);
            hww += s * zi * zi;
            hwb += s * zi;
            hbb += s;
        }
        let det = hww * hbb - hwb * hwb;
        if !(det > 0.0 && det.is_finite()) {
            break;
        }
        let dw = (hbb * gw - hwb * gb) / det;
        let db = (hww * gb - hwb * gw) / det;

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..30 {
            let (nw, nb) = (w + step * dw, b + step * db);
            let nll = penalized_loglik(&z, y, nw, nb);
            if nll.is_finite() && nll >= ll {
                accepted = Some((nw, nb, nll));
                break;
            }
            step *= 0.5;
        }
        let Some((nw, nb, nll)) = accepted else {
            converged = true;
            break;
        };
        let change = nll - ll;
        w = nw;
        b = nb;
        ll = nll;
        if change < LOGLIK_TOL {
            converged = true;
            break;
        }
    }
    Ok(LogisticModel { weight: w, bias: b, converged, iterations, sorted, rank_mean: rm.mean, rank_std: rm.std })
}
