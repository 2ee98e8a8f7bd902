//! Lattice sums for the collision coefficients.
//!
//! For every mode `k` the sum runs over `(α, μ)` in lexicographic order with
//! `ν = k + α − μ` fixed by momentum conservation; quadruples whose `ν`
//! falls off the grid are skipped. Self-interaction quadruples are kept.
//! Modes are independent and evaluated in parallel; each per-mode sum has a
//! fixed order, so results do not depend on the thread count.

use std::f64::consts::PI;

use rayon::prelude::*;

use super::{BroadenedKernel, CollisionRates, GammaConvention, RateProvenance, Spectrum};
use crate::error::{Error, Result};
use crate::wave_model::{InteractionModel, WaveModel};

/// Bounds of the intermediate averaging window `2π/ω_max ≪ T ≪ 1/(ω_min ε²)`
/// and the geometric-mean choice between them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeWindow {
    pub lower: f64,
    pub upper: f64,
    pub chosen: f64,
}

impl TimeWindow {
    pub fn is_well_separated(&self) -> bool {
        self.upper > 10.0 * self.lower
    }
}

pub fn averaging_time_window(model: &WaveModel) -> Result<TimeWindow> {
    let omega = model.frequencies();
    let max = omega.iter().cloned().fold(0.0, f64::max);
    let min = omega.iter().cloned().filter(|w| *w > 0.0).fold(f64::INFINITY, f64::min);
    if !(max > 0.0) || !min.is_finite() {
        return Err(Error::Domain("averaging window needs nonzero frequencies".into()));
    }
    if model.epsilon == 0.0 {
        return Err(Error::Domain("averaging window is unbounded for epsilon = 0".into()));
    }
    let lower = 2.0 * PI / max;
    let upper = 1.0 / (min * model.epsilon * model.epsilon);
    let window = TimeWindow { lower, upper, chosen: (lower * upper).sqrt() };
    log::info!("averaging window: 2π/ω_max = {lower:.6e}, 1/(ω_min ε²) = {upper:.6e}, T = {:.6e}", window.chosen);
    if !window.is_well_separated() {
        log::warn!("averaging window bounds are not well separated (ratio {:.3})", upper / lower);
    }
    Ok(window)
}

struct Precomputed {
    omega: Vec<f64>,
    norms: Vec<f64>,
    interaction: InteractionModel,
}

impl Precomputed {
    fn new(model: &WaveModel) -> Self {
        let norms = (0..model.grid.len()).map(|i| model.grid.wavevector(i).norm()).collect();
        Self { omega: model.frequencies(), norms, interaction: model.interaction }
    }

    #[inline]
    fn w2(&self, k: usize, a: usize, m: usize, n: usize) -> f64 {
        let w = self.interaction.coupling_from_norms(self.norms[k], self.norms[a], self.norms[m], self.norms[n]);
        w * w
    }
}

/// Raw per-mode sums `(Σ_η, Σ_γ)` before the `4πε²` / `8πε²` prefactors.
fn mode_sums(
    model: &WaveModel,
    pre: &Precomputed,
    n: &[f64],
    kernel: &BroadenedKernel,
    k: usize,
    convention: Option<GammaConvention>,
) -> (f64, f64) {
    let grid = &model.grid;
    let size = grid.len();
    let om = &pre.omega;
    let mut eta = 0.0;
    let mut gamma = 0.0;
    for a in 0..size {
        for m in 0..size {
            let Some(v) = grid.partner(k, a, m) else { continue };
            let w2 = pre.w2(k, a, m, v);
            let (na, nm, nv) = (n[a], n[m], n[v]);
            let resonance = kernel.weight(om[k] + om[a] - om[m] - om[v]);
            eta += w2 * resonance * na * nm * nv;
            match convention {
                Some(GammaConvention::EquilibriumConsistent) => {
                    gamma += w2 * resonance * (na * nm + na * nv - nm * nv);
                }
                Some(GammaConvention::Literal) => {
                    let literal = kernel.weight(om[k] + om[v] - om[a] - om[m]);
                    gamma += w2 * literal * (na * (nm + nv) - nm * nv);
                }
                None => {}
            }
        }
    }
    (eta, gamma)
}

fn prefactors(model: &WaveModel, convention: GammaConvention) -> (f64, f64) {
    let e2 = model.epsilon * model.epsilon;
    let eta = 4.0 * PI * e2;
    let gamma = match convention {
        GammaConvention::EquilibriumConsistent => 4.0 * PI * e2,
        GammaConvention::Literal => 8.0 * PI * e2,
    };
    (eta, gamma)
}

/// `η_k` and `γ_k` for every grid mode.
pub fn rates_discrete(
    model: &WaveModel,
    spectrum: &Spectrum,
    kernel: &BroadenedKernel,
    convention: GammaConvention,
) -> Result<CollisionRates> {
    spectrum.check_grid(&model.grid)?;
    let pre = Precomputed::new(model);
    let n = spectrum.values();
    let (ce, cg) = prefactors(model, convention);
    let sums: Vec<(f64, f64)> =
        (0..model.grid.len()).into_par_iter().map(|k| mode_sums(model, &pre, n, kernel, k, Some(convention))).collect();
    Ok(CollisionRates {
        eta: sums.iter().map(|s| ce * s.0).collect(),
        gamma: sums.iter().map(|s| cg * s.1).collect(),
        provenance: RateProvenance::Discrete { averaging_time: kernel.averaging_time() },
        convention,
    })
}

/// `(η_k, γ_k)` for a subset of modes; for large grids where only a few
/// wavevectors are needed.
pub fn rates_discrete_at(
    model: &WaveModel,
    spectrum: &Spectrum,
    kernel: &BroadenedKernel,
    convention: GammaConvention,
    modes: &[usize],
) -> Result<Vec<(f64, f64)>> {
    spectrum.check_grid(&model.grid)?;
    if let Some(bad) = modes.iter().find(|m| **m >= model.grid.len()) {
        return Err(Error::Domain(format!("mode index {bad} is outside the grid")));
    }
    let pre = Precomputed::new(model);
    let n = spectrum.values();
    let (ce, cg) = prefactors(model, convention);
    Ok(modes
        .par_iter()
        .map(|&k| {
            let (e, g) = mode_sums(model, &pre, n, kernel, k, Some(convention));
            (ce * e, cg * g)
        })
        .collect())
}

pub fn eta_discrete(model: &WaveModel, spectrum: &Spectrum, kernel: &BroadenedKernel) -> Result<Vec<f64>> {
    spectrum.check_grid(&model.grid)?;
    let pre = Precomputed::new(model);
    let n = spectrum.values();
    let (ce, _) = prefactors(model, GammaConvention::EquilibriumConsistent);
    Ok((0..model.grid.len()).into_par_iter().map(|k| ce * mode_sums(model, &pre, n, kernel, k, None).0).collect())
}

pub fn gamma_discrete(model: &WaveModel, spectrum: &Spectrum, kernel: &BroadenedKernel, convention: GammaConvention) -> Result<Vec<f64>> {
    Ok(rates_discrete(model, spectrum, kernel, convention)?.gamma)
}
