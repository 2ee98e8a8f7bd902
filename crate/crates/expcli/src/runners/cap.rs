//! `cap-experiment`: forced, damped ensemble under an amplitude ceiling.

use anyhow::{bail, Context, Result};
use wtlab_core::ensemble::{run_ensemble, Cap, Drive, EnsembleConfig, EnsembleStats};
use wtlab_core::stats::{jackknife, normal_critical};
use wtlab_core::wave_model::{CutoffModel, WaveModel};

use super::ensemble::{describe, histogram_rows, setup, trajectory_csv, HISTOGRAM_COLUMNS};
use super::mode_index;
use crate::config::{CapLevel, CapSection, ExperimentConfig};
use crate::manifest::{Check, RunOutcome};
use crate::output::{k_cells, k_header, Cell, Csv, OutputDir};

/// Jackknife groups for the excess confidence interval.
const GROUPS: usize = 50;

fn levels(model: &WaveModel, n: &[f64], level: CapLevel) -> Result<Vec<f64>> {
    let grid = &model.grid;
    (0..grid.len())
        .map(|m| {
            let k = grid.wavevector(m);
            Ok(match level {
                CapLevel::Critical if k.norm() == 0.0 => f64::INFINITY,
                CapLevel::Critical => {
                    let w = model.interaction.interaction(&k, &k, &k, &k).abs();
                    CutoffModel::new(model.dispersion, model.epsilon, w)?.critical_amplitude(&k)?
                }
                CapLevel::Multiple { over_n } if n[m] > 0.0 => over_n * n[m],
                CapLevel::Multiple { .. } => f64::INFINITY,
            })
        })
        .collect()
}

fn drive(model: &WaveModel, cap: &CapSection) -> Drive {
    let norms: Vec<f64> = model.grid.wavevectors().iter().map(|k| k.norm()).collect();
    Drive {
        forcing: norms.iter().map(|&k| if k > 0.0 && k <= cap.forcing_k_max { cap.forcing } else { 0.0 }).collect(),
        damping: norms.iter().map(|&k| if k >= cap.damping_k_min { cap.damping } else { 0.0 }).collect(),
    }
}

/// Probe-mode samples after burn-in, realization by realization.
fn probe_samples(stats: &EnsembleStats, mode: usize, from: usize) -> Vec<f64> {
    (0..stats.realizations).flat_map(|r| (from..stats.snapshots()).map(move |s| (r, s))).map(|(r, s)| stats.intensity(s, r, mode)).collect()
}

/// `P(s)/P_Rayleigh(s)` averaged over `[s − h, s + h]`, both in units of the sample mean.
pub fn excess(samples: &[f64], s_over_n: f64, half_width_over_n: f64) -> f64 {
    let n = samples.iter().sum::<f64>() / samples.len() as f64;
    let (lo, hi) = ((s_over_n - half_width_over_n) * n, (s_over_n + half_width_over_n) * n);
    let hits = samples.iter().filter(|&&s| s >= lo && s < hi).count() as f64 / samples.len() as f64;
    let rayleigh = (-lo / n).exp() - (-hi / n).exp();
    hits / rayleigh
}

pub fn run(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<RunOutcome> {
    let mut s = setup(cfg)?;
    let cap = cfg.cap.clone().context("missing [cap]")?;
    if !(0.0..1.0).contains(&cap.burn_in) {
        bail!("cap.burn_in must lie in [0, 1)");
    }
    if cap.probe_half_width_over_n >= cap.probe_s_over_n {
        bail!("cap.probe_half_width_over_n must be below cap.probe_s_over_n");
    }
    let grid = s.model.grid.clone();
    let probe = mode_index(&grid, Some(&cap.probe_mode))?;
    s.step.cap = Some(Cap { levels: levels(&s.model, s.spectrum.values(), cap.level)?, policy: cap.policy, cadence: cap.cadence });
    s.step.drive = Some(drive(&s.model, &cap));
    let config = EnsembleConfig {
        realizations: s.section.realizations,
        seed: cfg.seed.context("seed")?,
        step: s.step.clone(),
        omega_policy: s.section.omega_policy,
        keep_final_states: false,
    };
    let stats = run_ensemble(&s.system, &s.sampler, &config)?;
    out.csv("trajectory.csv", trajectory_csv(&grid, &stats))?;

    let from = stats.times.iter().position(|t| *t >= cap.burn_in * s.step.t_end).unwrap_or(stats.snapshots() - 1);
    let samples = probe_samples(&stats, probe, from);
    let mut header = k_header(&grid);
    header.extend(HISTOGRAM_COLUMNS);
    let mut hist = Csv::new(&header);
    histogram_rows(&mut hist, &k_cells(&grid, probe), &samples, s.section.histogram_bins, s.section.histogram_max_over_n)?;
    out.csv("probe_pdf.csv", hist)?;

    let mut spectrum = k_header(&grid);
    spectrum.extend(["n_initial", "n_mean", "excess"]);
    let mut spec_csv = Csv::new(&spectrum);
    for m in 0..grid.len() {
        let pooled = stats.pooled_samples(m, from);
        let mut row = k_cells(&grid, m);
        let mean = pooled.iter().sum::<f64>() / pooled.len() as f64;
        let ex = if mean > 0.0 { excess(&pooled, cap.probe_s_over_n, cap.probe_half_width_over_n) } else { 0.0 };
        row.extend([Cell::from(s.spectrum.values()[m]), mean.into(), ex.into()]);
        spec_csv.row(row);
    }
    out.csv("spectrum.csv", spec_csv)?;

    let statistic = |v: &[f64]| excess(v, cap.probe_s_over_n, cap.probe_half_width_over_n);
    let (value, se) = jackknife(&samples, GROUPS.min(stats.realizations), statistic)?;
    let z = normal_critical(cap.confidence);
    let (lo, hi) = (value - z * se, value + z * se);
    let n = samples.iter().sum::<f64>() / samples.len() as f64;
    let mut ex = Csv::new(&["s_over_n", "n", "excess", "stderr", "ci_lo", "ci_hi", "confidence", "threshold"]);
    ex.row([
        Cell::from(cap.probe_s_over_n),
        n.into(),
        value.into(),
        se.into(),
        lo.into(),
        hi.into(),
        cap.confidence.into(),
        cap.threshold.into(),
    ]);
    out.csv("excess.csv", ex)?;

    let mut outcome = RunOutcome::default();
    outcome.checks.push(Check::above("probability_excess", value, cap.threshold));
    outcome.conventions.rayleigh_reference = Some("Rayleigh law with the probe mode's time- and ensemble-mean intensity".into());
    describe(&mut outcome, cfg, &s);
    outcome.set("cap", &cap);
    outcome.set("cap_hits", stats.cap_hits);
    outcome.set("probe_mode", grid.lattice_index(probe));
    outcome.set("excess", [value, lo, hi]);
    Ok(outcome)
}
