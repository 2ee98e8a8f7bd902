//! `rates`, `kinetic` and `moments`.

use anyhow::{bail, Context, Result};
use wtlab_core::collision::{
    continuum_to_discrete_factor, rates_continuum, rates_discrete, BroadenedKernel, CollisionRates, QuadratureSpec, Spectrum,
};
use wtlab_core::kinetic::{evolve_moments, evolve_spectrum, frozen, MomentVector};
use wtlab_core::wave_model::WaveModel;

use super::{mode_index, snapshot_stride};
use crate::config::{CollisionSection, ExperimentConfig, RateRoute, SpectrumSection};
use crate::manifest::{Check, Conventions, RunOutcome};
use crate::output::{k_cells, k_header, Cell, Csv, OutputDir};

fn section(cfg: &ExperimentConfig) -> CollisionSection {
    cfg.collision.unwrap_or_default()
}

fn compute_rates(model: &WaveModel, spectrum: &Spectrum, shape: &SpectrumSection, col: &CollisionSection) -> Result<CollisionRates> {
    match col.route {
        RateRoute::Discrete => {
            let t = col.averaging_time.context("collision.averaging_time")?;
            Ok(rates_discrete(model, spectrum, &BroadenedKernel::new(t)?, col.convention)?)
        }
        RateRoute::Continuum => {
            let q = &col.quadrature;
            let k_max = q.k_max.context("collision.quadrature.k_max")?;
            let quad = QuadratureSpec::new(q.nodes, q.root_tol, k_max, q.domain)?;
            let n = |k: f64| shape.value(k);
            Ok(rates_continuum(model, &model.grid.wavevectors(), &n, &quad, col.convention)?)
        }
    }
}

fn conventions(model: &WaveModel, col: &CollisionSection) -> Conventions {
    Conventions {
        gamma_convention: Some(col.convention.label().into()),
        discrete_normalization: Some(continuum_to_discrete_factor(&model.grid)),
        rayleigh_reference: None,
    }
}

fn describe(outcome: &mut RunOutcome, cfg: &ExperimentConfig, col: &CollisionSection) {
    outcome.set("wave_model", cfg.wave_model);
    outcome.set("spectrum", cfg.spectrum_section());
    outcome.set("collision", col);
}

pub fn rates(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<RunOutcome> {
    let model = cfg.model()?;
    let shape = cfg.spectrum_section();
    let spectrum = shape.build(&model.grid)?;
    let col = section(cfg);
    let rates = compute_rates(&model, &spectrum, &shape, &col)?;
    let grid = &model.grid;
    let mut header = k_header(grid);
    header.extend(["k", "omega", "n", "eta", "gamma", "convention", "T"]);
    let mut csv = Csv::new(&header);
    let t = rates.averaging_time().unwrap_or(f64::NAN);
    for m in 0..grid.len() {
        let k = grid.wavevector(m);
        let mut row = k_cells(grid, m);
        row.extend([
            Cell::from(k.norm()),
            model.dispersion.dispersion(&k).into(),
            spectrum.values()[m].into(),
            rates.eta[m].into(),
            rates.gamma[m].into(),
            col.convention.label().into(),
            t.into(),
        ]);
        csv.row(row);
    }
    out.csv("rates.csv", csv)?;
    let min_eta = rates.eta.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut outcome = RunOutcome { conventions: conventions(&model, &col), ..Default::default() };
    outcome.checks.push(Check::at_most("eta_non_negative", -min_eta, 0.0));
    outcome.checks.push(Check::flag("finite", rates.eta.iter().chain(&rates.gamma).all(|v| v.is_finite())));
    describe(&mut outcome, cfg, &col);
    Ok(outcome)
}

pub fn kinetic(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<RunOutcome> {
    let model = cfg.model()?;
    let shape = cfg.spectrum_section();
    let spectrum = shape.build(&model.grid)?;
    let col = section(cfg);
    if col.route != RateRoute::Discrete {
        bail!("kinetic evolution needs collision.route = \"discrete\"");
    }
    let kin = cfg.kinetic.as_ref().context("missing [kinetic]")?;
    let kernel = BroadenedKernel::new(col.averaging_time.context("collision.averaging_time")?)?;
    let traj = evolve_spectrum(&spectrum, kin.t_end, kin.dt, |s| rates_discrete(&model, s, &kernel, col.convention))?;
    let grid = &model.grid;
    let mut header = vec!["t"];
    header.extend(k_header(grid));
    header.push("n");
    let mut csv = Csv::new(&header);
    let stride = snapshot_stride(traj.times.len() - 1, kin.snapshots);
    for (i, (t, n)) in traj.times.iter().zip(&traj.spectra).enumerate() {
        if i % stride != 0 && i + 1 != traj.times.len() {
            continue;
        }
        for m in 0..grid.len() {
            let mut row = vec![Cell::from(*t)];
            row.extend(k_cells(grid, m));
            row.push(n[m].into());
            csv.row(row);
        }
    }
    out.csv("spectrum.csv", csv)?;
    let a0: f64 = spectrum.values().iter().sum();
    let a1: f64 = traj.last().iter().sum();
    let mut outcome = RunOutcome { conventions: conventions(&model, &col), ..Default::default() };
    outcome.checks.push(Check::at_most("clipped_values", traj.clipped as f64, 0.0));
    outcome.checks.push(Check::flag("finite", traj.last().iter().all(|v| v.is_finite())));
    outcome.set("relative_action_change", (a1 - a0) / a0);
    outcome.set("kinetic", kin);
    describe(&mut outcome, cfg, &col);
    Ok(outcome)
}

pub fn moments(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<RunOutcome> {
    let model = cfg.model()?;
    let shape = cfg.spectrum_section();
    let spectrum = shape.build(&model.grid)?;
    let col = section(cfg);
    let kin = cfg.kinetic.as_ref().context("missing [kinetic]")?;
    let grid = &model.grid;
    let mode = mode_index(grid, kin.mode.as_deref())?;
    let rates = compute_rates(&model, &spectrum, &shape, &col)?;
    let (eta, gamma) = (rates.eta[mode], rates.gamma[mode]);
    let initial = MomentVector::gaussian(kin.initial_scale * spectrum.values()[mode], kin.pmax)?;
    let traj = evolve_moments(&initial, kin.t_end, kin.dt, frozen(eta, gamma))?;
    let mut header = vec!["t"];
    header.extend(k_header(grid));
    header.extend(["p", "M"]);
    let mut csv = Csv::new(&header);
    let stride = snapshot_stride(traj.times.len() - 1, kin.snapshots);
    for (i, (t, m)) in traj.times.iter().zip(&traj.moments).enumerate() {
        if i % stride != 0 && i + 1 != traj.times.len() {
            continue;
        }
        for (p, v) in m.iter().enumerate() {
            let mut row = vec![Cell::from(*t)];
            row.extend(k_cells(grid, mode));
            row.extend([Cell::from(p), Cell::from(*v)]);
            csv.row(row);
        }
    }
    out.csv("moments.csv", csv)?;
    let last = MomentVector::new(traj.moments.last().expect("initial state").clone())?;
    let mut outcome = RunOutcome { conventions: conventions(&model, &col), ..Default::default() };
    outcome.checks.push(Check::at_most("cauchy_schwarz", last.cauchy_schwarz_violation(), 1e-12));
    outcome.set("mode", grid.lattice_index(mode));
    outcome.set("eta", eta);
    outcome.set("gamma", gamma);
    outcome.set("kinetic", kin);
    describe(&mut outcome, cfg, &col);
    Ok(outcome)
}
