//! Summary statistics used by the experiment harness: moments, a
//! Kolmogorov–Smirnov test against a normal law, lag-1 autocorrelation and
//! Freedman–Diaconis histograms.

use serde::Serialize;
use statrs::distribution::{Continuous, ContinuousCDF, Normal};
use statrs::function::erf::erfc;

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Unbiased sample variance; `None` for fewer than two values.
pub fn sample_variance(x: &[f64]) -> Option<f64> {
    if x.len() < 2 {
        return None;
    }
    let m = mean(x);
    Some(x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (x.len() - 1) as f64)
}

/// Two-sided standard normal tail `P(|Z| > |t|)`.
pub fn two_sided_p(t: f64) -> f64 {
    erfc(t.abs() / std::f64::consts::SQRT_2)
}

/// Kolmogorov distribution tail `Q(λ) = 2 Σ (−1)^{k−1} exp(−2k²λ²)`.
fn kolmogorov_tail(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=200 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// One-sample KS test of `x` against `N(mu, sd²)`. The p-value uses the
/// asymptotic Kolmogorov law with Stephens' finite-sample correction.
pub fn ks_normal(x: &[f64], mu: f64, sd: f64) -> Option<KsResult> {
    if x.is_empty() || !(sd > 0.0) || x.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let dist = Normal::new(mu, sd).ok()?;
    let mut sorted = x.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &v) in sorted.iter().enumerate() {
        let f = dist.cdf(v);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    let sn = n.sqrt();
    Some(KsResult { statistic: d, p_value: kolmogorov_tail((sn + 0.12 + 0.11 / sn) * d) })
}

/// Lag-1 sample autocorrelation; `None` when undefined.
pub fn lag1_autocorrelation(x: &[f64]) -> Option<f64> {
    if x.len() < 3 {
        return None;
    }
    let m = mean(x);
    let den: f64 = x.iter().map(|v| (v - m).powi(2)).sum();
    if den == 0.0 {
        return None;
    }
    let num: f64 = x.windows(2).map(|w| (w[0] - m) * (w[1] - m)).sum();
    Some(num / den)
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn median(x: &[f64]) -> f64 {
    let mut s = x.to_vec();
    s.sort_by(f64::total_cmp);
    quantile_sorted(&s, 0.5)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HistogramBin {
    pub left: f64,
    pub right: f64,
    pub count: usize,
    /// Empirical density `count/(N·width)`.
    pub density: f64,
    /// Standard normal density at the bin midpoint.
    pub normal_density: f64,
}

const MAX_BINS: usize = 200;

/// Freedman–Diaconis histogram with a standard normal overlay.
pub fn histogram(x: &[f64]) -> Vec<HistogramBin> {
    let finite: Vec<f64> = x.iter().copied().filter(|v| v.is_finite()).collect();
    if finite.is_empty() {
        return Vec::new();
    }
    let mut sorted = finite.clone();
    sorted.sort_by(f64::total_cmp);
    let (lo, hi) = (sorted[0], sorted[sorted.len() - 1]);
    let n = sorted.len() as f64;
    let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
    let width = 2.0 * iqr / n.cbrt();
    let bins = if hi > lo && width > 0.0 { (((hi - lo) / width).ceil() as usize).clamp(1, MAX_BINS) } else { 1 };
    let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, hi + 0.5) };
    let w = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for v in &sorted {
        let k = (((v - lo) / w) as usize).min(bins - 1);
        counts[k] += 1;
    }
    let std = Normal::standard();
    counts
        .into_iter()
        .enumerate()
        .map(|(k, count)| {
            let left = lo + k as f64 * w;
            let right = if k + 1 == bins { hi } else { lo + (k + 1) as f64 * w };
            HistogramBin {
                left,
                right,
                count,
                density: count as f64 / (n * w),
                normal_density: std.pdf(0.5 * (left + right)),
            }
        })
        .collect()
}
