//! Direct ensembles of the four-wave dynamics.
//!
//! Fields are sampled under the random phase and amplitude ansatz, advanced
//! with the exact quartic sum, and reduced to intensity statistics. Every
//! realization draws from its own ChaCha stream keyed by the master seed
//! and its index, and results are reduced in index order, so outputs do not
//! depend on the thread count.

pub mod estimators;
pub mod integrate;
pub mod io;
pub mod run;
pub mod slope;
pub mod system;

use std::f64::consts::TAU;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::collision::Spectrum;
use crate::error::{Error, Result};

pub use estimators::{estimate_generating_function, estimate_moments, estimate_pdf, PdfEstimate, ZEstimate};
pub use integrate::{default_dt, integrate, Cap, CapPolicy, Drive, IntegrationReport, Scheme, StepOptions};
pub use run::{run_ensemble, EnsembleConfig, EnsembleStats, OmegaPolicy};
pub use slope::{measure_kinetic_slope, predicted_change, KineticSlope, SlopeConfig};
pub use system::{InteractionSet, QuarticSystem};

/// One realization: interaction-representation amplitudes `b_l` at `time`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeState {
    pub amplitudes: Vec<C64>,
    pub time: f64,
}

impl ModeState {
    pub fn new(amplitudes: Vec<C64>, time: f64) -> Self {
        Self { amplitudes, time }
    }

    pub fn intensities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|b| b.norm_sqr()).collect()
    }

    /// Amplitudes `A_l ≥ 0` and unit phase factors `ψ_l` (`ψ = 1` where `A = 0`).
    pub fn decompose(&self) -> (Vec<f64>, Vec<C64>) {
        self.amplitudes
            .iter()
            .map(|b| {
                let a = b.norm();
                (a, if a > 0.0 { b / a } else { C64::new(1.0, 0.0) })
            })
            .unzip()
    }

    /// Non-rotating amplitudes `c_l = b_l e^{−iω_l t}`.
    pub fn non_rotating(&self, omega: &[f64]) -> Vec<C64> {
        rotate(&self.amplitudes, omega, -self.time)
    }

    pub fn from_non_rotating(c: &[C64], omega: &[f64], time: f64) -> Self {
        Self { amplitudes: rotate(c, omega, time), time }
    }

    /// Renormalized amplitudes `a_l = b_l e^{iΩ_l t}`.
    pub fn renormalized(&self, shift: &[f64]) -> Vec<C64> {
        rotate(&self.amplitudes, shift, self.time)
    }
}

fn rotate(z: &[C64], freq: &[f64], t: f64) -> Vec<C64> {
    z.iter().zip(freq).map(|(v, w)| v * C64::from_polar(1.0, w * t)).collect()
}

/// Per-mode law of the intensity `|b|²`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AmplitudeSpec {
    /// Exponential intensity with mean `n_k` (Gaussian field).
    #[default]
    Rayleigh,
    /// `|b_k|² = n_k` exactly.
    Deterministic,
    /// Exponential intensity conditioned on `|b|² ≤ cap · n_k`.
    TruncatedRayleigh { cap: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RpaSampler {
    pub spectrum: Spectrum,
    pub spec: AmplitudeSpec,
}

impl RpaSampler {
    pub fn new(spectrum: Spectrum, spec: AmplitudeSpec) -> Result<Self> {
        if let AmplitudeSpec::TruncatedRayleigh { cap } = spec {
            if !(cap > 0.0 && cap.is_finite()) {
                return Err(Error::Domain(format!("truncation must be positive, got {cap}")));
            }
        }
        Ok(Self { spectrum, spec })
    }

    /// Independent uniform phases and independent amplitudes; per mode the
    /// intensity is drawn before the phase.
    pub fn sample(&self, rng: &mut impl Rng) -> ModeState {
        let amplitudes = self
            .spectrum
            .values()
            .iter()
            .map(|&n| {
                let s = match self.spec {
                    AmplitudeSpec::Rayleigh => n * rng.sample::<f64, _>(Exp1),
                    AmplitudeSpec::Deterministic => n,
                    AmplitudeSpec::TruncatedRayleigh { cap } => {
                        let u: f64 = rng.random();
                        -n * (-u * (-(-cap).exp_m1())).ln_1p()
                    }
                };
                let phase: f64 = rng.random::<f64>() * TAU;
                C64::from_polar(s.sqrt(), phase)
            })
            .collect();
        ModeState::new(amplitudes, 0.0)
    }
}

/// Random stream of realization `index` under `master_seed`.
pub fn realization_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}
