//! Collision coefficients `η_k` (action feed) and `γ_k` (relaxation rate) of
//! the four-wave kinetic equation `ṅ_k = η_k − γ_k n_k`.
//!
//! Two independent routes are provided:
//!
//! * [`discrete`]: lattice sums over momentum-conserving quadruples with the
//!   frequency delta replaced by the finite-time kernel `K_T`;
//! * [`continuum`]: quadrature over the resonant manifold of an isotropic
//!   spectrum, resolving the frequency delta by root finding.
//!
//! On a lattice of spacing `Δk = 2π/L` the two are related by
//! `η_discrete ≈ (L/2π)^{2d} η_continuum` (see [`continuum_to_discrete_factor`]).

pub mod continuum;
pub mod discrete;
mod kernel;

use serde::{Deserialize, Serialize};

pub use continuum::{eta_continuum, gamma_continuum, rates_continuum, rates_continuum_at, ContinuumRates, DomainShape, QuadratureSpec};
pub use discrete::{averaging_time_window, eta_discrete, gamma_discrete, rates_discrete, rates_discrete_at, TimeWindow};
pub use kernel::BroadenedKernel;

use crate::error::{Error, Result};
use crate::wave_model::{SpectralGrid, Wavevector};

/// Which form of `γ_k` to evaluate.
///
/// `EquilibriumConsistent` uses the `4π` prefactor, the same frequency delta
/// as `η` and the integrand `n₁n₂ + n₁n₃ − n₂n₃`; with it any constant
/// spectrum is a fixed point of the kinetic equation. `Literal` keeps the
/// `8π` prefactor, the `δ(ω_k + ω₃ − ω₁ − ω₂)` resonance and the integrand
/// `n₁(n₂ + n₃) − n₂n₃`, which does not have that property.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaConvention {
    #[default]
    EquilibriumConsistent,
    Literal,
}

impl GammaConvention {
    pub fn label(&self) -> &'static str {
        match self {
            Self::EquilibriumConsistent => "equilibrium",
            Self::Literal => "literal",
        }
    }
}

/// Per-mode wave action `n_k ≥ 0` on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    values: Vec<f64>,
}

impl Spectrum {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(**v >= 0.0 && v.is_finite())) {
            return Err(Error::Domain(format!("spectrum must be finite and non-negative, mode {i} has {v}")));
        }
        Ok(Self { values })
    }

    pub fn constant(grid: &SpectralGrid, value: f64) -> Result<Self> {
        Self::new(vec![value; grid.len()])
    }

    pub fn from_fn(grid: &SpectralGrid, f: impl Fn(&Wavevector) -> f64) -> Result<Self> {
        Self::new((0..grid.len()).map(|i| f(&grid.wavevector(i))).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn check_grid(&self, grid: &SpectralGrid) -> Result<()> {
        if self.len() != grid.len() {
            return Err(Error::SizeMismatch { expected: grid.len(), actual: self.len() });
        }
        Ok(())
    }
}

/// How a set of rates was produced.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "route", rename_all = "snake_case")]
pub enum RateProvenance {
    Discrete {
        averaging_time: f64,
    },
    Continuum {
        nodes: usize,
        root_tol: f64,
        k_max: f64,
        near_singular_roots: usize,
    },
    /// Supplied directly by the caller (toy models, frozen-rate runs).
    External,
}

/// Per-mode `(η_k, γ_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CollisionRates {
    pub eta: Vec<f64>,
    pub gamma: Vec<f64>,
    pub provenance: RateProvenance,
    pub convention: GammaConvention,
}

impl CollisionRates {
    pub fn external(eta: Vec<f64>, gamma: Vec<f64>) -> Result<Self> {
        if eta.len() != gamma.len() {
            return Err(Error::SizeMismatch { expected: eta.len(), actual: gamma.len() });
        }
        Ok(Self { eta, gamma, provenance: RateProvenance::External, convention: GammaConvention::EquilibriumConsistent })
    }

    pub fn len(&self) -> usize {
        self.eta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eta.is_empty()
    }

    pub fn averaging_time(&self) -> Option<f64> {
        match self.provenance {
            RateProvenance::Discrete { averaging_time } => Some(averaging_time),
            _ => None,
        }
    }
}

/// Ratio `η_discrete / η_continuum` expected on a lattice of box side `L`:
/// each free partner sum becomes `(L/2π)^d ∫ dk`, and the momentum Kronecker
/// delta eliminates one of the three.
pub fn continuum_to_discrete_factor(grid: &SpectralGrid) -> f64 {
    (grid.length() / (2.0 * std::f64::consts::PI)).powi(2 * grid.dim() as i32)
}
