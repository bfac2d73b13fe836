//! Goodness-of-fit and small estimation helpers.

use crate::error::{Error, Result};

/// One-sample Kolmogorov-Smirnov distance `sup |F_n(x) - F(x)|`.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("no samples"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let n = sorted.len() as f64;
    Ok(sorted.iter().enumerate().fold(0.0f64, |d, (i, &x)| {
        let f = cdf(x);
        let above = (i + 1) as f64 / n - f;
        let below = f - i as f64 / n;
        d.max(above).max(below)
    }))
}

/// Asymptotic critical distance `c(alpha) / sqrt(n)` for the one-sample test.
pub fn ks_critical(n: usize, alpha: f64) -> f64 {
    (-0.5 * (alpha / 2.0).ln()).sqrt() / (n as f64).sqrt()
}

pub fn binomial_standard_error(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / xs.len() as f64
}

/// Quantile by linear interpolation between order statistics of sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Least-squares polynomial coefficients (lowest order first).
pub fn polyfit(xs: &[f64], ys: &[f64], degree: usize) -> Option<Vec<f64>> {
    let m = degree + 1;
    let mut a = vec![vec![0.0; m + 1]; m];
    for (&x, &y) in xs.iter().zip(ys) {
        let powers: Vec<f64> = (0..m).map(|k| x.powi(k as i32)).collect();
        for r in 0..m {
            for c in 0..m {
                a[r][c] += powers[r] * powers[c];
            }
            a[r][m] += powers[r] * y;
        }
    }
    solve_augmented(a)
}

/// Gaussian elimination with partial pivoting on an `m x (m+1)` system.
pub(crate) fn solve_augmented(mut a: Vec<Vec<f64>>) -> Option<Vec<f64>> {
    let m = a.len();
    for col in 0..m {
        let pivot = (col..m).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        for row in col + 1..m {
            let f = a[row][col] / a[col][col];
            for k in col..=m {
                a[row][k] -= f * a[col][k];
            }
        }
    }
    let mut x = vec![0.0; m];
    for row in (0..m).rev() {
        let s: f64 = (row + 1..m).map(|k| a[row][k] * x[k]).sum();
        x[row] = (a[row][m] - s) / a[row][row];
    }
    Some(x)
}

/// Mode of a unimodal sample: histogram the data, locate the peak of a
/// smoothed histogram, then take the maximum of a cubic fitted to the bin
/// heights within half a standard deviation of that peak.
pub fn empirical_mode(samples: &[f64]) -> Result<f64> {
    if samples.len() < 100 {
        return Err(Error::EmptyInput("mode estimation needs at least 100 samples"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let lo = quantile_sorted(&sorted, 0.001);
    let hi = quantile_sorted(&sorted, 0.999);
    let spread = variance(samples).sqrt();
    let bins = 400usize;
    let width = (hi - lo) / bins as f64;
    if !(width > 0.0) {
        return Ok(lo);
    }
    let mut counts = vec![0.0; bins];
    for &x in &sorted {
        if x >= lo && x < hi {
            counts[(((x - lo) / width) as usize).min(bins - 1)] += 1.0;
        }
    }
    let half = 10usize;
    let smoothed: Vec<f64> = (0..bins)
        .map(|i| {
            let a = i.saturating_sub(half);
            let b = (i + half + 1).min(bins);
            counts[a..b].iter().sum::<f64>() / (b - a) as f64
        })
        .collect();
    let peak = smoothed
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let centre = lo + (peak as f64 + 0.5) * width;
    let reach = 0.5 * spread;
    let (xs, ys): (Vec<f64>, Vec<f64>) = (0..bins)
        .map(|i| (lo + (i as f64 + 0.5) * width, counts[i]))
        .filter(|(x, _)| (x - centre).abs() <= reach)
        .map(|(x, y)| ((x - centre) / reach, y))
        .unzip();
    let coeffs = polyfit(&xs, &ys, 3).ok_or(Error::Domain("degenerate mode fit".into()))?;
    // maximise the cubic on [-1, 1]
    let eval = |u: f64| coeffs[0] + u * (coeffs[1] + u * (coeffs[2] + u * coeffs[3]));
    let mut candidates = vec![-1.0, 1.0];
    let (a, b, c) = (3.0 * coeffs[3], 2.0 * coeffs[2], coeffs[1]);
    if a.abs() > 1e-300 {
        let disc = b * b - 4.0 * a * c;
        if disc >= 0.0 {
            candidates.push((-b + disc.sqrt()) / (2.0 * a));
            candidates.push((-b - disc.sqrt()) / (2.0 * a));
        }
    } else if b.abs() > 1e-300 {
        candidates.push(-c / b);
    }
    let best = candidates
        .into_iter()
        .filter(|u| (-1.0..=1.0).contains(u))
        .max_by(|u, v| eval(*u).total_cmp(&eval(*v)))
        .unwrap_or(0.0);
    Ok(centre + best * reach)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn ks_of_exact_quantiles_is_small() {
        let n = 1000;
        let xs: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let d = ks_statistic(&xs, |x| x.clamp(0.0, 1.0)).unwrap();
        assert_abs_diff_eq!(d, 0.5 / n as f64, epsilon = 1e-12);
        assert!(ks_statistic(&[], |x| x).is_err());
    }

    #[test]
    fn ks_detects_shift() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0 + 0.1).collect();
        let d = ks_statistic(&xs, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!(d > 0.099);
    }

    #[test]
    fn ks_critical_value() {
        assert_abs_diff_eq!(ks_critical(1, 0.05), 1.3581, epsilon = 1e-3);
    }

    #[test]
    fn polyfit_recovers_cubic() {
        let xs: Vec<f64> = (0..20).map(|i| i as f64 * 0.1 - 1.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 1.0 - 2.0 * x + 0.5 * x * x + 3.0 * x * x * x).collect();
        let c = polyfit(&xs, &ys, 3).unwrap();
        for (got, want) in c.iter().zip([1.0, -2.0, 0.5, 3.0]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-9);
        }
    }

    #[test]
    fn quantiles_interpolate() {
        let s = [0.0, 1.0, 2.0, 3.0];
        assert_abs_diff_eq!(quantile_sorted(&s, 0.5), 1.5);
        assert_abs_diff_eq!(quantile_sorted(&s, 1.0), 3.0);
    }
}
