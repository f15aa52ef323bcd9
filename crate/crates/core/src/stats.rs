//! Descriptive statistics used by the samplers, the adjustment and the
//! experiment checks.

use crate::numerics::Mat;

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

pub fn weighted_mean(xs: &[f64], ws: &[f64]) -> f64 {
    let total: f64 = ws.iter().sum();
    xs.iter().zip(ws).map(|(x, w)| x * w).sum::<f64>() / total
}

/// Weighted variance with weights normalised to one (no bias correction).
pub fn weighted_variance(xs: &[f64], ws: &[f64]) -> f64 {
    let m = weighted_mean(xs, ws);
    let total: f64 = ws.iter().sum();
    xs.iter().zip(ws).map(|(x, w)| w * (x - m) * (x - m)).sum::<f64>() / total
}

/// Weighted mean vector and covariance of `points` (each of length `p`).
pub fn weighted_mean_cov(points: &[&[f64]], ws: &[f64], p: usize) -> (Vec<f64>, Mat) {
    let total: f64 = ws.iter().sum();
    let mut mu = vec![0.0; p];
    for (x, w) in points.iter().zip(ws) {
        for j in 0..p {
            mu[j] += w * x[j];
        }
    }
    mu.iter_mut().for_each(|m| *m /= total);
    let mut cov = Mat::zeros(p, p);
    for (x, w) in points.iter().zip(ws) {
        for i in 0..p {
            for j in 0..p {
                cov[(i, j)] += w * (x[i] - mu[i]) * (x[j] - mu[j]);
            }
        }
    }
    (mu, cov.scale(1.0 / total))
}

/// Unbiased covariance of a set of `d`-vectors.
pub fn sample_covariance(points: &[Vec<f64>], d: usize) -> Mat {
    let k = points.len() as f64;
    let mut mu = vec![0.0; d];
    for x in points {
        for j in 0..d {
            mu[j] += x[j] / k;
        }
    }
    let mut cov = Mat::zeros(d, d);
    for x in points {
        for i in 0..d {
            for j in 0..d {
                cov[(i, j)] += (x[i] - mu[i]) * (x[j] - mu[j]);
            }
        }
    }
    cov.scale(1.0 / (k - 1.0))
}

/// `(Σw)² / Σw²`.
pub fn effective_sample_size(ws: &[f64]) -> f64 {
    let s: f64 = ws.iter().sum();
    let s2: f64 = ws.iter().map(|w| w * w).sum();
    if s2 > 0.0 {
        s * s / s2
    } else {
        0.0
    }
}

/// One-sample Kolmogorov–Smirnov statistic `sup |F_n − F|`.
pub fn ks_statistic(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter().enumerate().fold(0.0_f64, |acc, (i, &x)| {
        let f = cdf(x);
        let above = (i as f64 + 1.0) / n - f;
        let below = f - i as f64 / n;
        acc.max(above).max(below)
    })
}

/// Excess kurtosis of a weighted sample.
pub fn excess_kurtosis(xs: &[f64], ws: &[f64]) -> f64 {
    let m = weighted_mean(xs, ws);
    let total: f64 = ws.iter().sum();
    let (m2, m4) = xs.iter().zip(ws).fold((0.0, 0.0), |(a, b), (x, w)| {
        let d2 = (x - m) * (x - m);
        (a + w * d2, b + w * d2 * d2)
    });
    let (m2, m4) = (m2 / total, m4 / total);
    m4 / (m2 * m2) - 3.0
}

/// Least-squares slope and intercept of `y` on `x`.
pub fn ols_line(x: &[f64], y: &[f64]) -> (f64, f64) {
    let mx = mean(x);
    let my = mean(y);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Local maxima of a Gaussian kernel density estimate.
///
/// Bandwidth is `1.06 · sd · N^(−1/5)`; a mode must exceed 10% of the global
/// maximum and sit at least `min_separation` from any higher mode.
pub fn kde_modes(xs: &[f64], ws: &[f64], min_separation: f64) -> Vec<f64> {
    let sd = weighted_variance(xs, ws).sqrt();
    let n_eff = effective_sample_size(ws);
    let h = 1.06 * sd * n_eff.powf(-0.2);
    if !(h > 0.0) {
        return xs.first().copied().into_iter().collect();
    }
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min) - 3.0 * h;
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 3.0 * h;
    let points = 1024;
    let step = (hi - lo) / (points - 1) as f64;
    let grid: Vec<f64> = (0..points).map(|i| lo + step * i as f64).collect();
    // Bin first so the cost stays O(points) per evaluation.
    let mut bins = vec![0.0; points];
    for (x, w) in xs.iter().zip(ws) {
        let idx = (((x - lo) / step).round() as usize).min(points - 1);
        bins[idx] += w;
    }
    let reach = (4.0 * h / step).ceil() as isize;
    let dens: Vec<f64> = (0..points as isize)
        .map(|i| {
            let mut acc = 0.0;
            for k in (i - reach).max(0)..=(i + reach).min(points as isize - 1) {
                let b = bins[k as usize];
                if b != 0.0 {
                    let u = (grid[i as usize] - grid[k as usize]) / h;
                    acc += b * (-0.5 * u * u).exp();
                }
            }
            acc
        })
        .collect();
    let global = dens.iter().copied().fold(0.0_f64, f64::max);
    let mut peaks: Vec<(f64, f64)> = (1..points - 1)
        .filter(|&i| dens[i] >= dens[i - 1] && dens[i] > dens[i + 1] && dens[i] > 0.1 * global)
        .map(|i| (grid[i], dens[i]))
        .collect();
    peaks.sort_by(|a, b| b.1.total_cmp(&a.1));
    let mut kept: Vec<f64> = Vec::new();
    for (x, _) in peaks {
        if kept.iter().all(|k| (k - x).abs() >= min_separation) {
            kept.push(x);
        }
    }
    kept.sort_by(f64::total_cmp);
    kept
}
