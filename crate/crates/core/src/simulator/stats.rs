//! Sample summaries and Kolmogorov–Smirnov machinery.

use crate::error::{Error, Result};

/// Freedman–Diaconis histogram: `counts[i]` covers `[edges[i], edges[i+1])`,
/// with the last bin closed on the right.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryStats {
    pub sample_mean: f64,
    /// Unbiased (n − 1) sample variance.
    pub sample_variance: f64,
    pub count: usize,
    pub ci95_halfwidth: f64,
    pub histogram: Histogram,
    pub ks_statistic: Option<f64>,
}

impl SummaryStats {
    /// Standard error of the mean.
    pub fn standard_error(&self) -> f64 {
        (self.sample_variance / self.count as f64).sqrt()
    }
}

pub fn summarize(samples: &[f64]) -> Result<SummaryStats> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::InsufficientData {
            count: n,
            needed: 2,
        });
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(Error::domain("samples must be finite"));
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let variance = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    Ok(SummaryStats {
        sample_mean: mean,
        sample_variance: variance,
        count: n,
        ci95_halfwidth: 1.96 * (variance / n as f64).sqrt(),
        histogram: freedman_diaconis(samples),
        ks_statistic: None,
    })
}

/// [`summarize`] plus the KS distance to the continuous CDF `cdf`.
pub fn summarize_with_cdf<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<SummaryStats> {
    let mut stats = summarize(samples)?;
    stats.ks_statistic = Some(ks_statistic(samples, cdf));
    Ok(stats)
}

fn sorted(samples: &[f64]) -> Vec<f64> {
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Type-7 (linear interpolation) quantile of sorted data.
fn quantile_sorted(v: &[f64], p: f64) -> f64 {
    let h = (v.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(v.len() - 1);
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

fn freedman_diaconis(samples: &[f64]) -> Histogram {
    let v = sorted(samples);
    let (min, max) = (v[0], v[v.len() - 1]);
    let iqr = quantile_sorted(&v, 0.75) - quantile_sorted(&v, 0.25);
    let width = 2.0 * iqr / (v.len() as f64).cbrt();
    let bins = if width > 0.0 && max > min {
        (((max - min) / width).ceil() as usize).clamp(1, 10_000)
    } else {
        1
    };
    let span = if max > min { max - min } else { 1.0 };
    let edges: Vec<f64> = (0..=bins)
        .map(|i| min + span * i as f64 / bins as f64)
        .collect();
    let mut counts = vec![0u64; bins];
    for x in &v {
        let idx = (((x - min) / span) * bins as f64).floor() as usize;
        counts[idx.min(bins - 1)] += 1;
    }
    Histogram { edges, counts }
}

/// Standard error of the sample variance, estimated from the spread of the
/// variances of `batches` contiguous batches.
pub fn batched_variance_standard_error(samples: &[f64], batches: usize) -> Result<f64> {
    let size = samples.len() / batches.max(1);
    if batches < 2 || size < 2 {
        return Err(Error::InsufficientData {
            count: samples.len(),
            needed: 4.max(2 * batches),
        });
    }
    let variances: Vec<f64> = samples
        .chunks_exact(size)
        .take(batches)
        .map(|c| {
            let m = c.iter().sum::<f64>() / size as f64;
            c.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (size - 1) as f64
        })
        .collect();
    let spread = summarize(&variances)?;
    Ok((spread.sample_variance / batches as f64).sqrt())
}

/// Two-sided KS distance `sup_t |F_n(t) − F(t)|` for a continuous `cdf`.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let v = sorted(samples);
    let n = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// KS distance on `[0, limit]` for right-censored data.
///
/// `observed` holds the uncensored values (all `≤ limit`); `total` counts
/// every sample, censored ones included. The empirical CDF is compared with
/// `cdf` only up to `limit`.
pub fn ks_statistic_censored<F: Fn(f64) -> f64>(
    observed: &[f64],
    total: usize,
    limit: f64,
    cdf: F,
) -> f64 {
    let v = sorted(observed);
    let n = total as f64;
    let inner = v
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max);
    inner.max((v.len() as f64 / n - cdf(limit)).abs())
}

/// Asymptotic Kolmogorov survival function `P(K > x)`.
pub fn kolmogorov_sf(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < 0.3 {
        // Series below converges slowly here and the value is 1 to 1e-15.
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * x * x).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// p-value of a KS distance `d` over `n` samples, with Stephens' small-sample
/// correction.
pub fn ks_p_value(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d)
}

/// Critical KS distance at significance `alpha` for `n` samples.
pub fn ks_critical_value(n: usize, alpha: f64) -> f64 {
    let (mut lo, mut hi) = (0.3, 5.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if kolmogorov_sf(mid) > alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let sn = (n as f64).sqrt();
    0.5 * (lo + hi) / (sn + 0.12 + 0.11 / sn)
}
