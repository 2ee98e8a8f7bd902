use serde::Serialize;

use crate::error::{Error, Result};
use crate::stats::{compensated_sum, jackknife, mean_and_stderr};

/// Smallest sample count accepted by [`estimate_pdf`].
pub const MIN_PDF_SAMPLES: usize = 100;

/// Histogram estimate of `P(s)` normalized by the total sample count, so
/// samples outside the bins still count towards the normalization.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PdfEstimate {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub density: Vec<f64>,
    /// Binomial standard error of each bin density.
    pub stderr: Vec<f64>,
    pub samples: usize,
    /// Bins without a single sample.
    pub empty_bins: Vec<usize>,
}

impl PdfEstimate {
    pub fn centres(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    /// Per-bin z-scores against bin probabilities `p_i = ∫_bin P ds`
    /// computed from `cdf`, with the binomial variance of the expectation.
    pub fn z_scores(&self, cdf: impl Fn(f64) -> f64) -> Vec<f64> {
        let r = self.samples as f64;
        self.edges
            .windows(2)
            .zip(&self.counts)
            .map(|(w, c)| {
                let p = cdf(w[1]) - cdf(w[0]);
                let expected = r * p;
                let sd = (r * p * (1.0 - p)).sqrt();
                if sd > 0.0 {
                    (*c as f64 - expected) / sd
                } else if *c == 0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            })
            .collect()
    }
}

pub fn estimate_pdf(samples: &[f64], edges: &[f64]) -> Result<PdfEstimate> {
    if samples.len() < MIN_PDF_SAMPLES {
        return Err(Error::InsufficientData(format!("PDF estimate needs {MIN_PDF_SAMPLES} samples, got {}", samples.len())));
    }
    if edges.len() < 2 || edges.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain("bin edges must be strictly increasing".into()));
    }
    let bins = edges.len() - 1;
    let mut counts = vec![0u64; bins];
    for &s in samples {
        if s < edges[0] || s >= edges[bins] {
            continue;
        }
        let i = edges.partition_point(|e| *e <= s) - 1;
        counts[i.min(bins - 1)] += 1;
    }
    let r = samples.len() as f64;
    let widths: Vec<f64> = edges.windows(2).map(|w| w[1] - w[0]).collect();
    let density = counts.iter().zip(&widths).map(|(c, w)| *c as f64 / (r * w)).collect();
    let stderr = counts
        .iter()
        .zip(&widths)
        .map(|(c, w)| {
            let p = *c as f64 / r;
            (p * (1.0 - p) / r).sqrt() / w
        })
        .collect();
    let empty_bins: Vec<usize> = counts.iter().enumerate().filter(|(_, c)| **c == 0).map(|(i, _)| i).collect();
    if !empty_bins.is_empty() {
        log::warn!("PDF estimate: {} of {bins} bins are empty", empty_bins.len());
    }
    Ok(PdfEstimate { edges: edges.to_vec(), counts, density, stderr, samples: samples.len(), empty_bins })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZEstimate {
    pub lambda: f64,
    pub value: f64,
    pub stderr: f64,
}

/// Sample mean of `e^{λs}` per `λ`, with delete-a-group jackknife errors.
pub fn estimate_generating_function(samples: &[f64], lambdas: &[f64], groups: usize) -> Result<Vec<ZEstimate>> {
    if samples.is_empty() {
        return Err(Error::InsufficientData("no samples for Z(λ)".into()));
    }
    let smax = samples.iter().cloned().fold(0.0, f64::max);
    let n = compensated_sum(samples.iter().copied()) / samples.len() as f64;
    lambdas
        .iter()
        .map(|&lambda| {
            if lambda * smax >= 30.0 {
                return Err(Error::Guard(format!("λ·max s = {:.3} ≥ 30 risks overflow", lambda * smax)));
            }
            if lambda * n >= 1.0 {
                log::warn!("λn = {:.3} ≥ 1: Z(λ) diverges for a Rayleigh law", lambda * n);
            }
            let values: Vec<f64> = samples.iter().map(|s| (lambda * s).exp()).collect();
            let (value, stderr) = jackknife(&values, groups, |v| compensated_sum(v.iter().copied()) / v.len() as f64)?;
            Ok(ZEstimate { lambda, value, stderr })
        })
        .collect()
}

/// Sample moments `⟨sᵖ⟩` for `p = 0..=pmax` with standard errors.
pub fn estimate_moments(samples: &[f64], pmax: u32) -> Result<Vec<(f64, f64)>> {
    (0..=pmax)
        .map(|p| {
            let v: Vec<f64> = samples.iter().map(|s| s.powi(p as i32)).collect();
            mean_and_stderr(&v)
        })
        .collect()
}
