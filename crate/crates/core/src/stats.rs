//! Small sample-statistics helpers shared by the Monte-Carlo checks.

use statrs::function::erf::erf;

/// Mean and standard error of the mean.
pub fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::INFINITY);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
}

/// Least-squares line y = a + b·x with weights 1/σ². Returns (a, b, σ_b).
pub fn weighted_line_fit(x: &[f64], y: &[f64], sigma: &[f64]) -> (f64, f64, f64) {
    let (mut s, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for ((&xi, &yi), &si) in x.iter().zip(y).zip(sigma) {
        let w = 1.0 / (si * si);
        s += w;
        sx += w * xi;
        sy += w * yi;
        sxx += w * xi * xi;
        sxy += w * xi * yi;
    }
    let det = s * sxx - sx * sx;
    let b = (s * sxy - sx * sy) / det;
    let a = (sxx * sy - sx * sxy) / det;
    (a, b, (s / det).sqrt())
}

/// Fixed-width histogram on [lo, hi) returning bin probabilities (samples
/// outside the range count toward the total but fall in no bin).
pub fn histogram(samples: impl IntoIterator<Item = f64>, lo: f64, hi: f64, bins: usize) -> Vec<f64> {
    let mut counts = vec![0u64; bins];
    let mut total = 0u64;
    let width = (hi - lo) / bins as f64;
    for x in samples {
        total += 1;
        if x >= lo && x < hi {
            let b = (((x - lo) / width) as usize).min(bins - 1);
            counts[b] += 1;
        }
    }
    counts.iter().map(|&c| c as f64 / total.max(1) as f64).collect()
}

/// Σ|p̂ᵢ − pᵢ| plus the target mass outside the binned range.
pub fn l1_distance(empirical: &[f64], target: &[f64]) -> f64 {
    let inside: f64 = target.iter().sum();
    let emp_inside: f64 = empirical.iter().sum();
    empirical
        .iter()
        .zip(target)
        .map(|(a, b)| (a - b).abs())
        .sum::<f64>()
        + ((1.0 - inside) - (1.0 - emp_inside)).abs()
}

/// Bin probabilities of a centered Gaussian with the given variance.
pub fn gaussian_bin_probabilities(variance: f64, lo: f64, hi: f64, bins: usize) -> Vec<f64> {
    let width = (hi - lo) / bins as f64;
    let s = (2.0 * variance).sqrt();
    (0..bins)
        .map(|b| {
            let a = lo + b as f64 * width;
            0.5 * (erf((a + width) / s) - erf(a / s))
        })
        .collect()
}
