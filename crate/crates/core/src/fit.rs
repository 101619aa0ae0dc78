//! Least-squares fits used by the scaling experiments.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Fit of `⟨δ⟩ ≈ 2^(−k n + c)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingFit {
    pub k: f64,
    /// Standard error of `k` from the fit covariance.
    pub k_uncertainty: f64,
    /// Intercept `c` of `log₂⟨δ⟩ = −k n + c`.
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares of `log₂⟨δ⟩` on `n`.
///
/// `points` holds `(n, ⟨δ⟩)`; at least three distinct sizes are needed for an
/// uncertainty.
pub fn fit_scaling(points: &[(f64, f64)]) -> Result<ScalingFit> {
    if points.len() < 3 {
        return Err(Error::InsufficientData {
            needed: 3,
            got: points.len(),
        });
    }
    if let Some(&(n, value)) = points.iter().find(|(_, d)| !(*d > 0.0)) {
        return Err(Error::NonPositiveMean { n: n as usize, value });
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| libm::log2(p.1)).collect();
    let line = linear_regression(&xs, &ys)?;
    Ok(ScalingFit {
        k: -line.slope,
        k_uncertainty: line.slope_stderr,
        intercept: line.intercept,
        r_squared: line.r_squared,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub r_squared: f64,
}

pub fn linear_regression(xs: &[f64], ys: &[f64]) -> Result<Line> {
    let m = xs.len();
    if m < 3 || ys.len() != m {
        return Err(Error::InsufficientData { needed: 3, got: m.min(ys.len()) });
    }
    let mf = m as f64;
    let mx = xs.iter().sum::<f64>() / mf;
    let my = ys.iter().sum::<f64>() / mf;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("abscissae must not all be equal"));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    let slope_stderr = libm::sqrt(rss / (mf - 2.0) / sxx);
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - rss / syy };
    Ok(Line {
        slope,
        intercept,
        slope_stderr,
        r_squared,
    })
}

/// Least squares of `θ ≈ a/p` over `(p, θ)` points. Returns `(a, σ_a)`.
pub fn fit_inverse_depth(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    if points.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: points.len(),
        });
    }
    let sww: f64 = points.iter().map(|(p, _)| 1.0 / (p * p)).sum();
    let swy: f64 = points.iter().map(|(p, t)| t / p).sum();
    let a = swy / sww;
    let rss: f64 = points
        .iter()
        .map(|(p, t)| {
            let r = t - a / p;
            r * r
        })
        .sum();
    let sigma = libm::sqrt(rss / (points.len() as f64 - 1.0) / sww);
    Ok((a, sigma))
}

/// Mean and sample standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let m = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / m;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (m - 1.0);
    (mean, libm::sqrt(var))
}

/// Median of a slice (NaN for an empty slice).
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 0 {
        0.5 * (v[mid - 1] + v[mid])
    } else {
        v[mid]
    }
}
