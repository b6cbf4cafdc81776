//! Small statistics toolbox shared by the estimators and the experiment
//! harness: moments with standard errors, quantiles, a chi-square uniformity
//! test, a two-sample Kolmogorov-Smirnov test, Theil-Sen slopes and bootstrap
//! resampling.

use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

/// Unbiased sample variance.
pub fn variance(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(values);
    values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1) as f64
}

/// Standard error of the sample mean.
pub fn standard_error(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    (variance(values) / values.len() as f64).sqrt()
}

/// Standard error of an empirical frequency `p_hat` out of `n` trials.
pub fn binomial_se(p_hat: f64, n: usize) -> f64 {
    if n == 0 {
        return f64::NAN;
    }
    (p_hat * (1.0 - p_hat) / n as f64).sqrt()
}

/// Empirical quantile with linear interpolation; `q` in [0, 1].
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q.clamp(0.0, 1.0) * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        let w = pos - lo as f64;
        sorted[lo] * (1.0 - w) + sorted[hi] * w
    }
}

pub fn sorted_copy(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("non-NaN"));
    v
}

pub fn median(values: &[f64]) -> f64 {
    quantile(&sorted_copy(values), 0.5)
}

/// Chi-square goodness-of-fit against uniform cell probabilities.
///
/// Returns `(statistic, p_value)`. `counts` are observed cell counts.
pub fn chi_square_uniform(counts: &[u64]) -> (f64, f64) {
    let cells = counts.len();
    assert!(cells >= 2);
    let total: u64 = counts.iter().sum();
    let expected = total as f64 / cells as f64;
    let stat: f64 = counts
        .iter()
        .map(|&c| {
            let d = c as f64 - expected;
            d * d / expected
        })
        .sum();
    let dist = ChiSquared::new((cells - 1) as f64).expect("dof >= 1");
    let p = 1.0 - dist.cdf(stat);
    (stat, p)
}

/// Two-sample Kolmogorov-Smirnov test.
///
/// Returns `(d_statistic, p_value)` using the asymptotic Kolmogorov
/// distribution with the usual finite-sample correction.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
    let xs = sorted_copy(a);
    let ys = sorted_copy(b);
    let (n, m) = (xs.len(), ys.len());
    assert!(n > 0 && m > 0);
    let mut i = 0;
    let mut j = 0;
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let fx = if xs[i] <= ys[j] {
            let t = xs[i];
            while i < n && xs[i] == t {
                i += 1;
            }
            true
        } else {
            false
        };
        if !fx {
            let t = ys[j];
            while j < m && ys[j] == t {
                j += 1;
            }
        }
        let diff = (i as f64 / n as f64 - j as f64 / m as f64).abs();
        d = d.max(diff);
    }
    let ne = (n as f64 * m as f64) / (n + m) as f64;
    let sqrt_ne = ne.sqrt();
    let lambda = (sqrt_ne + 0.12 + 0.11 / sqrt_ne) * d;
    (d, kolmogorov_q(lambda))
}

/// Kolmogorov tail function Q(lambda) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2).
fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 1e-8 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let term = (-2.0 * (k as f64) * (k as f64) * lambda * lambda).exp();
        sum += sign * term;
        sign = -sign;
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Theil-Sen slope estimate: median of pairwise slopes.
///
/// Pairs with equal abscissae are skipped. Returns `None` when fewer than two
/// distinct abscissae exist.
pub fn theil_sen_slope(points: &[(f64, f64)]) -> Option<f64> {
    let mut slopes = Vec::new();
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            let dx = points[j].0 - points[i].0;
            if dx.abs() > 1e-12 {
                slopes.push((points[j].1 - points[i].1) / dx);
            }
        }
    }
    if slopes.is_empty() {
        None
    } else {
        Some(median(&slopes))
    }
}

/// Indices of one bootstrap resample of `0..n`.
pub fn bootstrap_indices<R: Rng>(rng: &mut R, n: usize) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(0..n)).collect()
}

/// Percentile bootstrap band `[lo_q, hi_q]` of `statistic` over `resamples`
/// resamples of `values`.
pub fn bootstrap_band<R, F>(
    rng: &mut R,
    values: &[f64],
    resamples: usize,
    lo_q: f64,
    hi_q: f64,
    mut statistic: F,
) -> (f64, f64)
where
    R: Rng,
    F: FnMut(&[f64]) -> f64,
{
    let mut stats = Vec::with_capacity(resamples);
    let mut buf = vec![0.0; values.len()];
    for _ in 0..resamples {
        for slot in buf.iter_mut() {
            *slot = values[rng.random_range(0..values.len())];
        }
        stats.push(statistic(&buf));
    }
    stats.sort_by(|a, b| a.partial_cmp(b).expect("non-NaN"));
    (quantile(&stats, lo_q), quantile(&stats, hi_q))
}
