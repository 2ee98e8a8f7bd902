//! One-mode intensity PDF `P(s, t)` with `s = |a|²`, governed by the
//! conservation law `Ṗ + ∂_s F = 0` with flux `F = −s(γP + η∂_sP)`.
//!
//! Closed-form steady states (Rayleigh, constant finite flux, the `1/s`
//! tail series) live here; the finite-volume solver and the cutoff
//! boundary-value problem are in [`evolve`] and [`cutoff`].

pub mod cutoff;
mod ei;
pub mod evolve;
mod grid;

use serde::Serialize;

pub use cutoff::{alternative_form_residuals, steady_pdf_with_cutoff, AlternativeForms, CutoffClosure, CutoffSteadyState};
pub use ei::exp_integral_ei;
pub use evolve::{evolve_pdf, Boundary, PdfTrajectory};
pub use grid::AmplitudePdf;

use crate::error::{Error, Result};

/// `(1/n) e^{−s/n}`.
pub fn rayleigh_pdf(s: f64, n: f64) -> Result<f64> {
    if !(n > 0.0 && n.is_finite()) {
        return Err(Error::Domain(format!("mean intensity must be positive, got {n}")));
    }
    if s < 0.0 {
        return Err(Error::Domain(format!("intensity must be non-negative, got {s}")));
    }
    Ok((-s / n).exp() / n)
}

/// `F = −s(γP + η ∂_sP)`.
pub fn flux_of(p: f64, dp_ds: f64, s: f64, gamma: f64, eta: f64) -> f64 {
    if s == 0.0 {
        return 0.0;
    }
    -s * (gamma * p + eta * dp_ds)
}

/// Parameters of the constant-flux steady state
/// `P = C e^{−s/n} − (F/η) Ei(s/n) e^{−s/n}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FluxSolution {
    pub n: f64,
    pub eta: f64,
    pub gamma: f64,
    pub flux: f64,
    pub homogeneous: f64,
}

impl FluxSolution {
    /// Builds the solution with `γ = η/n`.
    pub fn new(n: f64, eta: f64, flux: f64, homogeneous: f64) -> Result<Self> {
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::Domain(format!("mean intensity must be positive, got {n}")));
        }
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::Domain(format!("η must be positive, got {eta}")));
        }
        if flux > 0.0 {
            log::warn!("positive flux {flux}: the particular solution reduces the tail");
        }
        Ok(Self { n, eta, gamma: eta / n, flux, homogeneous })
    }

    /// Relative mismatch of `γ/η` against `1/n`.
    pub fn consistency_error(&self) -> f64 {
        (self.gamma * self.n / self.eta - 1.0).abs()
    }

    pub fn density(&self, s: f64) -> Result<f64> {
        steady_pdf_finite_flux(s, self)
    }

    /// `∂_sP`.
    pub fn derivative(&self, s: f64) -> Result<f64> {
        if s <= 0.0 {
            return Err(Error::LogSingularity);
        }
        let x = s / self.n;
        let ei = exp_integral_ei(x)?;
        let decay = (-x).exp();
        Ok(-self.homogeneous / self.n * decay - self.flux / self.eta * (1.0 / s - ei * decay / self.n))
    }
}

pub fn steady_pdf_finite_flux(s: f64, sol: &FluxSolution) -> Result<f64> {
    if s < 0.0 {
        return Err(Error::Domain(format!("intensity must be non-negative, got {s}")));
    }
    if s == 0.0 {
        if sol.flux != 0.0 {
            return Err(Error::LogSingularity);
        }
        return Ok(sol.homogeneous);
    }
    let x = s / sol.n;
    let decay = (-x).exp();
    if sol.flux == 0.0 {
        return Ok(sol.homogeneous * decay);
    }
    Ok(sol.homogeneous * decay - sol.flux / sol.eta * exp_integral_ei(x)? * decay)
}

/// Large-`s` expansion `−(F/η) Σ_{k<order} k! (n/s)^{k+1}` of the particular
/// solution, with `η = γn`. Requires `s ≥ 5n`.
pub fn tail_series(s: f64, n: f64, gamma: f64, flux: f64, order: usize) -> Result<f64> {
    if !(n > 0.0 && gamma > 0.0) {
        return Err(Error::Domain("tail series needs n > 0 and γ > 0".into()));
    }
    if s < 5.0 * n {
        return Err(Error::Domain(format!("tail series needs s ≥ 5n, got s/n = {}", s / n)));
    }
    if s < 10.0 * n {
        log::warn!("tail series used at s/n = {:.3}, below 10", s / n);
    }
    let eta = gamma * n;
    let ratio = n / s;
    let mut term = ratio;
    let mut sum = 0.0;
    for k in 0..order {
        if k > 0 {
            term *= k as f64 * ratio;
        }
        sum += term;
    }
    Ok(-flux / eta * sum)
}
