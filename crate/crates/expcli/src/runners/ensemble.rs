//! `ensemble`: free evolution of an RPA ensemble.

use anyhow::{Context, Result};
use num_complex::Complex64;
use wtlab_core::collision::Spectrum;
use wtlab_core::ensemble::io::{write_states, StateFile};
use wtlab_core::ensemble::{
    default_dt, estimate_pdf, run_ensemble, EnsembleConfig, EnsembleStats, ModeState, QuarticSystem, RpaSampler, StepOptions,
};
use wtlab_core::wave_model::{SpectralGrid, WaveModel};

use super::snapshot_stride;
use crate::config::{EnsembleSection, ExperimentConfig};
use crate::manifest::{Check, RunOutcome};
use crate::output::{k_cells, k_header, Cell, Csv, OutputDir};

/// Conservation tolerance of a free run.
pub const CONSERVATION_TOL: f64 = 1e-8;

pub(super) struct Setup {
    pub model: WaveModel,
    pub system: QuarticSystem,
    pub spectrum: Spectrum,
    pub sampler: RpaSampler,
    pub section: EnsembleSection,
    pub step: StepOptions,
}

/// Model, sampler and step options shared by the ensemble runners. The
/// default step is sized on the mean-intensity field `b_k = √n_k`.
pub(super) fn setup(cfg: &ExperimentConfig) -> Result<Setup> {
    let model = cfg.model()?;
    let section = cfg.ensemble.context("missing [ensemble]")?;
    let system = QuarticSystem::new(&model, section.interaction_set)?;
    let spectrum = cfg.spectrum_section().build(&model.grid)?;
    let sampler = RpaSampler::new(spectrum.clone(), section.amplitudes)?;
    let t_end = section.end_time(&model)?;
    let dt = match section.dt {
        Some(dt) => dt,
        None => {
            let mean = spectrum.values().iter().map(|n| Complex64::new(n.sqrt(), 0.0)).collect();
            default_dt(&system, &ModeState::new(mean, 0.0))
        }
    };
    let mut step = StepOptions::new(dt, t_end);
    step.scheme = section.scheme;
    step.snapshot_every = snapshot_stride((t_end / dt).ceil() as usize, section.snapshots);
    Ok(Setup { model, system, spectrum, sampler, section, step })
}

pub(super) fn describe(outcome: &mut RunOutcome, cfg: &ExperimentConfig, s: &Setup) {
    outcome.set("seed", cfg.seed);
    outcome.set("realizations", s.section.realizations);
    outcome.set("grid", cfg.wave_model.map(|w| w.grid));
    outcome.set("wave_model", cfg.wave_model);
    outcome.set("scheme", s.step.scheme);
    outcome.set("dt", s.step.dt);
    outcome.set("t_end", s.step.t_end);
    outcome.set("interaction_set", s.section.interaction_set);
}

/// Mean intensity per mode and snapshot, long format.
pub(super) fn trajectory_csv(grid: &SpectralGrid, stats: &EnsembleStats) -> Csv {
    let mut header = vec!["t"];
    header.extend(k_header(grid));
    header.extend(["n", "stderr"]);
    let mut csv = Csv::new(&header);
    let r = stats.realizations as f64;
    for (si, t) in stats.times.iter().enumerate() {
        let means = stats.mean_intensity(si);
        for (m, mean) in means.iter().enumerate() {
            let samples = stats.mode_samples(si, m);
            let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (r - 1.0).max(1.0);
            let mut row = vec![Cell::from(*t)];
            row.extend(k_cells(grid, m));
            row.extend([Cell::from(*mean), (var / r).sqrt().into()]);
            csv.row(row);
        }
    }
    csv
}

/// Histogram header shared with `compare`: `s` and `P` columns plus errors.
pub(super) const HISTOGRAM_COLUMNS: [&str; 8] = ["s_lo", "s_hi", "s", "P", "stderr", "count", "rayleigh", "z"];

/// Appends one mode's histogram against the Rayleigh law of its sample mean;
/// returns the bin z-scores.
pub(super) fn histogram_rows(csv: &mut Csv, prefix: &[Cell], samples: &[f64], bins: usize, max_over_n: f64) -> Result<Vec<f64>> {
    let n = samples.iter().sum::<f64>() / samples.len() as f64;
    let edges: Vec<f64> = (0..=bins).map(|i| n * max_over_n * i as f64 / bins as f64).collect();
    let est = estimate_pdf(samples, &edges)?;
    let z = est.z_scores(|s| -(-s / n).exp_m1());
    for (i, c) in est.centres().iter().enumerate() {
        let (lo, hi) = (edges[i], edges[i + 1]);
        let rayleigh = ((-lo / n).exp() - (-hi / n).exp()) / (hi - lo);
        let mut row: Vec<Cell> = prefix.to_vec();
        row.extend([
            Cell::from(lo),
            hi.into(),
            (*c).into(),
            est.density[i].into(),
            est.stderr[i].into(),
            (est.counts[i] as usize).into(),
            rayleigh.into(),
            z[i].into(),
        ]);
        csv.row(row);
    }
    Ok(z)
}

pub fn run(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<RunOutcome> {
    let s = setup(cfg)?;
    let seed = cfg.seed.context("seed")?;
    let config = EnsembleConfig {
        realizations: s.section.realizations,
        seed,
        step: s.step.clone(),
        omega_policy: s.section.omega_policy,
        keep_final_states: s.section.keep_final_states,
    };
    let stats = run_ensemble(&s.system, &s.sampler, &config)?;
    let grid = &s.model.grid;
    out.csv("trajectory.csv", trajectory_csv(grid, &stats))?;

    let mut header = k_header(grid);
    header.extend(HISTOGRAM_COLUMNS);
    let mut hist = Csv::new(&header);
    let last = stats.snapshots() - 1;
    let mut z_all = Vec::new();
    for m in 0..grid.len() {
        let samples = stats.mode_samples(last, m);
        if samples.iter().all(|v| *v == 0.0) {
            continue;
        }
        z_all.extend(histogram_rows(&mut hist, &k_cells(grid, m), &samples, s.section.histogram_bins, s.section.histogram_max_over_n)?);
    }
    out.csv("histogram.csv", hist)?;

    let mut header = vec!["t"];
    header.extend(k_header(grid));
    header.push("omega_shift");
    let mut shift = Csv::new(&header);
    for (t, row) in stats.shift_times.iter().zip(&stats.frequency_shift) {
        for (m, v) in row.iter().enumerate() {
            let mut cells = vec![Cell::from(*t)];
            cells.extend(k_cells(grid, m));
            cells.push((*v).into());
            shift.row(cells);
        }
    }
    out.csv("frequency_shift.csv", shift)?;

    if s.section.keep_final_states {
        let file = StateFile { resolution: grid.resolution() as u32, dim: grid.dim() as u32, states: stats.final_states.clone() };
        let mut bytes = Vec::new();
        write_states(&mut bytes, &file)?;
        out.write("final_states.bin", &bytes)?;
    }

    let mut outcome = RunOutcome::default();
    outcome.checks.push(Check::at_most("action_drift", stats.max_action_drift, CONSERVATION_TOL));
    outcome.checks.push(Check::at_most("energy_drift", stats.max_energy_drift, CONSERVATION_TOL));
    let within = z_all.iter().filter(|z| z.abs() <= 3.0).count() as f64 / z_all.len().max(1) as f64;
    outcome.set("rayleigh_bins_within_3sigma", within);
    outcome.conventions.rayleigh_reference = Some("Rayleigh law with each mode's sample mean".into());
    describe(&mut outcome, cfg, &s);
    outcome.set("omega_policy", s.section.omega_policy);
    Ok(outcome)
}
