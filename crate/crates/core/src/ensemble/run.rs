use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::integrate::{integrate, StepOptions};
use super::system::QuarticSystem;
use super::{realization_rng, ModeState, RpaSampler};
use crate::error::{Error, Result};
use crate::stats::compensated_sum;

/// When the frequency shift `Ω` is evaluated for reporting.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OmegaPolicy {
    /// From the initial amplitudes only.
    #[default]
    Initial,
    /// Again at every snapshot.
    PerSnapshot,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleConfig {
    pub realizations: usize,
    pub seed: u64,
    pub step: StepOptions,
    pub omega_policy: OmegaPolicy,
    pub keep_final_states: bool,
}

/// Intensities `|b_l|²` of every realization at every snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleStats {
    pub times: Vec<f64>,
    pub realizations: usize,
    pub modes: usize,
    /// Flattened `[snapshot][realization][mode]`.
    intensities: Vec<f64>,
    pub max_action_drift: f64,
    pub max_energy_drift: f64,
    pub cap_hits: usize,
    /// Ensemble-mean `Ω_k`, one row per evaluation time in `shift_times`.
    pub frequency_shift: Vec<Vec<f64>>,
    pub shift_times: Vec<f64>,
    pub final_states: Vec<ModeState>,
}

impl EnsembleStats {
    pub fn snapshots(&self) -> usize {
        self.times.len()
    }

    pub fn intensity(&self, snapshot: usize, realization: usize, mode: usize) -> f64 {
        self.intensities[(snapshot * self.realizations + realization) * self.modes + mode]
    }

    /// `|b_mode|²` across realizations at one snapshot.
    pub fn mode_samples(&self, snapshot: usize, mode: usize) -> Vec<f64> {
        (0..self.realizations).map(|r| self.intensity(snapshot, r, mode)).collect()
    }

    /// Samples of one mode pooled over snapshots `from..`.
    pub fn pooled_samples(&self, mode: usize, from: usize) -> Vec<f64> {
        (from..self.snapshots()).flat_map(|s| self.mode_samples(s, mode)).collect()
    }

    /// Ensemble-mean spectrum at one snapshot.
    pub fn mean_intensity(&self, snapshot: usize) -> Vec<f64> {
        (0..self.modes)
            .map(|m| compensated_sum((0..self.realizations).map(|r| self.intensity(snapshot, r, m))) / self.realizations as f64)
            .collect()
    }
}

/// Samples, integrates and reduces `config.realizations` fields in parallel.
pub fn run_ensemble(system: &QuarticSystem, sampler: &RpaSampler, config: &EnsembleConfig) -> Result<EnsembleStats> {
    if config.realizations == 0 {
        return Err(Error::InsufficientData("ensemble needs at least one realization".into()));
    }
    if sampler.spectrum.len() != system.len() {
        return Err(Error::SizeMismatch { expected: system.len(), actual: sampler.spectrum.len() });
    }
    let per_realization: Vec<_> = (0..config.realizations)
        .into_par_iter()
        .map(|i| {
            let mut rng = realization_rng(config.seed, i as u64);
            let initial = sampler.sample(&mut rng);
            integrate(system, &initial, &config.step, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    let modes = system.len();
    let r = config.realizations;
    let times: Vec<f64> = per_realization[0].snapshots.iter().map(|s| s.time).collect();
    let mut intensities = vec![0.0; times.len() * r * modes];
    for (ri, rep) in per_realization.iter().enumerate() {
        for (si, snap) in rep.snapshots.iter().enumerate() {
            for (m, b) in snap.amplitudes.iter().enumerate() {
                intensities[(si * r + ri) * modes + m] = b.norm_sqr();
            }
        }
    }
    let shift_rows: Vec<usize> = match config.omega_policy {
        OmegaPolicy::Initial => vec![0],
        OmegaPolicy::PerSnapshot => (0..times.len()).collect(),
    };
    let frequency_shift = shift_rows
        .iter()
        .map(|&si| {
            let shifts: Vec<Vec<f64>> = per_realization.iter().map(|rep| system.frequency_shift(&rep.snapshots[si].amplitudes)).collect();
            (0..modes).map(|m| compensated_sum(shifts.iter().map(|s| s[m])) / r as f64).collect()
        })
        .collect();
    let shift_times = shift_rows.iter().map(|&si| times[si]).collect();
    let stats = EnsembleStats {
        realizations: r,
        modes,
        max_action_drift: per_realization.iter().map(|p| p.action_drift).fold(0.0, f64::max),
        max_energy_drift: per_realization.iter().map(|p| p.energy_drift).fold(0.0, f64::max),
        cap_hits: per_realization.iter().map(|p| p.cap_hits).sum(),
        frequency_shift,
        shift_times,
        final_states: if config.keep_final_states { per_realization.into_iter().map(|p| p.final_state).collect() } else { Vec::new() },
        times,
        intensities,
    };
    log::info!(
        "ensemble: {} realizations, {} snapshots, action drift {:.2e}, energy drift {:.2e}, cap hits {}",
        r,
        stats.snapshots(),
        stats.max_action_drift,
        stats.max_energy_drift,
        stats.cap_hits
    );
    Ok(stats)
}
