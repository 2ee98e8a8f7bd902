//! Early-time growth of `⟨|b_k|²⟩` against the kinetic prediction.
//!
//! Each realization is run at `+ε` and `−ε` from the same initial field and
//! the two intensity changes are averaged. Terms odd in `ε` cancel
//! realization by realization, which removes the `O(ε)` oscillations that
//! otherwise dominate the variance of an `O(ε²)` signal.

use rayon::prelude::*;
use serde::Serialize;

use super::integrate::{integrate, Scheme, StepOptions};
use super::system::QuarticSystem;
use super::{realization_rng, RpaSampler};
use crate::collision::{rates_discrete, BroadenedKernel, GammaConvention, Spectrum};
use crate::error::{Error, Result};
use crate::stats::{compensated_sum, linear_fit, LinearFit};
use crate::wave_model::WaveModel;

#[derive(Debug, Clone, PartialEq)]
pub struct SlopeConfig {
    pub realizations: usize,
    pub seed: u64,
    /// Sample times of the fit window, increasing, at least five.
    pub times: Vec<f64>,
    pub dt: f64,
    pub scheme: Scheme,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KineticSlope {
    pub epsilon: f64,
    pub times: Vec<f64>,
    /// Mean antithetic change `[time][mode]`.
    pub mean_change: Vec<Vec<f64>>,
    pub change_stderr: Vec<Vec<f64>>,
    /// Least-squares slope of the mean change per mode.
    pub slope: Vec<f64>,
    /// Standard error of the slope across realizations.
    pub slope_stderr: Vec<f64>,
}

/// OLS weights `(x_i − x̄)/Sxx`, so the slope of any series is `Σ w_i y_i`.
fn slope_weights(times: &[f64]) -> Vec<f64> {
    let m = times.iter().sum::<f64>() / times.len() as f64;
    let sxx: f64 = times.iter().map(|t| (t - m) * (t - m)).sum();
    times.iter().map(|t| (t - m) / sxx).collect()
}

pub fn measure_kinetic_slope(
    system: &QuarticSystem,
    sampler: &RpaSampler,
    epsilons: &[f64],
    cfg: &SlopeConfig,
) -> Result<Vec<KineticSlope>> {
    if cfg.times.len() < 5 {
        return Err(Error::InsufficientData(format!("fit window has {} samples, need 5", cfg.times.len())));
    }
    if cfg.times.windows(2).any(|w| !(w[1] > w[0])) || cfg.times[0] <= 0.0 {
        return Err(Error::Domain("sample times must be positive and increasing".into()));
    }
    if cfg.realizations < 2 {
        return Err(Error::InsufficientData("slope errors need two realizations".into()));
    }
    let n = system.len();
    let nt = cfg.times.len();
    let weights = slope_weights(&cfg.times);
    epsilons
        .iter()
        .map(|&eps| {
            let plus = system.with_epsilon(eps);
            let minus = system.with_epsilon(-eps);
            // changes[r][time][mode]
            let changes: Vec<Vec<Vec<f64>>> = (0..cfg.realizations)
                .into_par_iter()
                .map(|r| {
                    let mut rng = realization_rng(cfg.seed, r as u64);
                    let initial = sampler.sample(&mut rng);
                    let s0 = initial.intensities();
                    let mut branches = [initial.clone(), initial];
                    let mut out = vec![vec![0.0; n]; nt];
                    for (ti, &t) in cfg.times.iter().enumerate() {
                        for (b, sys) in branches.iter_mut().zip([&plus, &minus]) {
                            let mut opts = StepOptions::new(cfg.dt, t);
                            opts.scheme = cfg.scheme;
                            *b = integrate(sys, b, &opts, &mut rng)?.final_state;
                        }
                        let (a, b) = (branches[0].intensities(), branches[1].intensities());
                        for m in 0..n {
                            out[ti][m] = 0.5 * (a[m] + b[m]) - s0[m];
                        }
                    }
                    Ok(out)
                })
                .collect::<Result<_>>()?;
            let rf = cfg.realizations as f64;
            let mean_at = |ti: usize, m: usize| compensated_sum(changes.iter().map(|c| c[ti][m])) / rf;
            let mean_change: Vec<Vec<f64>> = (0..nt).map(|ti| (0..n).map(|m| mean_at(ti, m)).collect()).collect();
            let change_stderr = (0..nt)
                .map(|ti| {
                    (0..n)
                        .map(|m| {
                            let mu = mean_change[ti][m];
                            let var = compensated_sum(changes.iter().map(|c| (c[ti][m] - mu).powi(2))) / (rf - 1.0);
                            (var / rf).sqrt()
                        })
                        .collect()
                })
                .collect();
            let per_real: Vec<Vec<f64>> =
                changes.iter().map(|c| (0..n).map(|m| (0..nt).map(|ti| weights[ti] * c[ti][m]).sum()).collect()).collect();
            let slope: Vec<f64> = (0..n).map(|m| compensated_sum(per_real.iter().map(|s| s[m])) / rf).collect();
            let slope_stderr = (0..n)
                .map(|m| {
                    let var = compensated_sum(per_real.iter().map(|s| (s[m] - slope[m]).powi(2))) / (rf - 1.0);
                    (var / rf).sqrt()
                })
                .collect();
            log::info!("kinetic slope at ε = {eps}: {} realizations, {} sample times", cfg.realizations, nt);
            Ok(KineticSlope { epsilon: eps, times: cfg.times.clone(), mean_change, change_stderr, slope, slope_stderr })
        })
        .collect()
}

/// Second-order prediction `t (η_t − γ_t n)` of the mean intensity change,
/// with the broadened kernel at averaging time `t`, `[time][mode]`.
pub fn predicted_change(model: &WaveModel, spectrum: &Spectrum, times: &[f64]) -> Result<Vec<Vec<f64>>> {
    times
        .iter()
        .map(|&t| {
            let kernel = BroadenedKernel::new(t)?;
            let rates = rates_discrete(model, spectrum, &kernel, GammaConvention::EquilibriumConsistent)?;
            Ok(rates.eta.iter().zip(&rates.gamma).zip(spectrum.values()).map(|((e, g), n)| t * (e - g * n)).collect())
        })
        .collect()
}

/// Least-squares slope of a `[time][mode]` series, per mode.
pub fn fitted_slopes(times: &[f64], series: &[Vec<f64>]) -> Vec<f64> {
    let w = slope_weights(times);
    let n = series.first().map_or(0, Vec::len);
    (0..n).map(|m| series.iter().zip(&w).map(|(row, wi)| wi * row[m]).sum()).collect()
}

/// Power-law fit `|slope| ∝ εᵖ` for one mode across measurements.
pub fn epsilon_exponent(slopes: &[KineticSlope], mode: usize) -> Result<LinearFit> {
    let (x, y): (Vec<f64>, Vec<f64>) = slopes.iter().map(|s| (s.epsilon.ln(), s.slope[mode].abs().ln())).unzip();
    if x.len() == 2 {
        let p = (y[1] - y[0]) / (x[1] - x[0]);
        return Ok(LinearFit {
            slope: p,
            intercept: y[0] - p * x[0],
            slope_stderr: f64::NAN,
            intercept_stderr: f64::NAN,
            slope_ci: (f64::NAN, f64::NAN),
            points: 2,
        });
    }
    linear_fit(&x, &y, 0.95)
}
