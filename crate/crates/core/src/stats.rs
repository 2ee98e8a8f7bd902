//! Small statistics toolkit shared by the ensemble estimators and reports.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

use crate::error::{Error, Result};

/// Neumaier-compensated sum; independent of thread scheduling when the
/// input order is fixed.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut carry = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

pub fn mean(values: &[f64]) -> f64 {
    compensated_sum(values.iter().copied()) / values.len() as f64
}

/// Sample mean and its standard error.
pub fn mean_and_stderr(values: &[f64]) -> Result<(f64, f64)> {
    if values.len() < 2 {
        return Err(Error::InsufficientData(format!("need two samples, got {}", values.len())));
    }
    let m = mean(values);
    let var = compensated_sum(values.iter().map(|v| (v - m) * (v - m))) / (values.len() - 1) as f64;
    Ok((m, (var / values.len() as f64).sqrt()))
}

/// Two-sided standard-normal quantile for confidence `level`.
pub fn normal_critical(level: f64) -> f64 {
    Normal::standard().inverse_cdf(0.5 + 0.5 * level)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub intercept_stderr: f64,
    /// Confidence interval of the slope at the requested level.
    pub slope_ci: (f64, f64),
    pub points: usize,
}

/// Ordinary least squares `y = a + b x` with a Student-t interval on `b`.
pub fn linear_fit(x: &[f64], y: &[f64], confidence: f64) -> Result<LinearFit> {
    if x.len() != y.len() {
        return Err(Error::SizeMismatch { expected: x.len(), actual: y.len() });
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::InsufficientData(format!("linear fit needs 3 points, got {n}")));
    }
    let mx = mean(x);
    let my = mean(y);
    let sxx = compensated_sum(x.iter().map(|v| (v - mx) * (v - mx)));
    if sxx == 0.0 {
        return Err(Error::InsufficientData("all abscissae coincide".into()));
    }
    let sxy = compensated_sum(x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)));
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss = compensated_sum(x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)));
    let dof = (n - 2) as f64;
    let sigma2 = rss / dof;
    let slope_stderr = (sigma2 / sxx).sqrt();
    let intercept_stderr = (sigma2 * (1.0 / n as f64 + mx * mx / sxx)).sqrt();
    let t = StudentsT::new(0.0, 1.0, dof).map_err(|e| Error::Domain(e.to_string()))?.inverse_cdf(0.5 + 0.5 * confidence);
    Ok(LinearFit {
        slope,
        intercept,
        slope_stderr,
        intercept_stderr,
        slope_ci: (slope - t * slope_stderr, slope + t * slope_stderr),
        points: n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// One-sample Kolmogorov–Smirnov test against a continuous CDF, with the
/// asymptotic Kolmogorov distribution and Stephens' small-sample correction.
pub fn ks_test(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<KsResult> {
    if samples.is_empty() {
        return Err(Error::InsufficientData("KS test on no samples".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let statistic = sorted
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let f = cdf(*x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max);
    let root = n.sqrt();
    let lambda = (root + 0.12 + 0.11 / root) * statistic;
    Ok(KsResult { statistic, p_value: kolmogorov_survival(lambda) })
}

/// `Q(λ) = 2 Σ_{k≥1} (−1)^{k−1} e^{−2k²λ²}`.
fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-17 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Pearson correlation coefficient.
pub fn correlation(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::SizeMismatch { expected: x.len(), actual: y.len() });
    }
    if x.len() < 2 {
        return Err(Error::InsufficientData("correlation needs two samples".into()));
    }
    let (mx, my) = (mean(x), mean(y));
    let sxy = compensated_sum(x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)));
    let sxx = compensated_sum(x.iter().map(|a| (a - mx).powi(2)));
    let syy = compensated_sum(y.iter().map(|b| (b - my).powi(2)));
    Ok(sxy / (sxx * syy).sqrt())
}

/// Delete-a-group jackknife of `statistic` over `groups` contiguous blocks.
/// Returns the full-sample estimate and the jackknife standard error.
pub fn jackknife(values: &[f64], groups: usize, statistic: impl Fn(&[f64]) -> f64) -> Result<(f64, f64)> {
    let g = groups.min(values.len());
    if g < 2 {
        return Err(Error::InsufficientData(format!("jackknife needs two groups, got {g}")));
    }
    let full = statistic(values);
    let bounds: Vec<usize> = (0..=g).map(|i| i * values.len() / g).collect();
    let mut rest = Vec::with_capacity(values.len());
    let leave_out: Vec<f64> = (0..g)
        .map(|i| {
            rest.clear();
            rest.extend_from_slice(&values[..bounds[i]]);
            rest.extend_from_slice(&values[bounds[i + 1]..]);
            statistic(&rest)
        })
        .collect();
    let m = mean(&leave_out);
    let gf = g as f64;
    let var = (gf - 1.0) / gf * compensated_sum(leave_out.iter().map(|v| (v - m).powi(2)));
    Ok((full, var.sqrt()))
}
