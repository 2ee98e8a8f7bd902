//! `pdf-steady` and `pdf-evolve`.

use anyhow::{Context, Result};
use wtlab_core::pdf::{
    evolve_pdf, flux_of, rayleigh_pdf, steady_pdf_finite_flux, steady_pdf_with_cutoff, tail_series, AmplitudePdf, Boundary, CutoffClosure,
    FluxSolution,
};

use super::snapshot_stride;
use crate::config::{ExperimentConfig, PdfSection};
use crate::manifest::{Check, RunOutcome};
use crate::output::{Cell, Csv, OutputDir};
use wtlab_core::quadrature::gauss_legendre_on;

fn section(cfg: &ExperimentConfig) -> Result<PdfSection> {
    cfg.pdf.context("missing [pdf]")
}

pub fn steady(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<RunOutcome> {
    let p = section(cfg)?;
    let gamma = p.eta / p.n;
    let mut outcome = RunOutcome::default();
    outcome.set("pdf", p);
    let mut csv = Csv::new(&["s", "P", "F"]);
    match p.snl_over_n {
        None => {
            let sol = FluxSolution::new(p.n, p.eta, p.flux, 1.0 / p.n)?;
            let grid = AmplitudePdf::geometric(p.cells, p.first_width_over_n * p.n, p.smax_over_n * p.n)?;
            let mut residual: f64 = 0.0;
            let mut tail_error: f64 = 0.0;
            let mut density = Vec::with_capacity(p.cells);
            for &s in grid.centres() {
                let pd = steady_pdf_finite_flux(s, &sol)?;
                let f = flux_of(pd, sol.derivative(s)?, s, gamma, p.eta);
                if p.flux != 0.0 {
                    residual = residual.max((f - p.flux).abs() / p.flux.abs());
                    if s >= 20.0 * p.n {
                        let tail = tail_series(s, p.n, gamma, p.flux, 2)?;
                        tail_error = tail_error.max((tail - pd).abs() / pd.abs());
                    }
                }
                density.push(pd);
                csv.row([Cell::from(s), pd.into(), f.into()]);
            }
            if p.flux == 0.0 {
                let mut mass = 0.0;
                for f in grid.faces().windows(2) {
                    let (x, w) = gauss_legendre_on(8, f[0], f[1]);
                    for (x, w) in x.iter().zip(&w) {
                        mass += w * steady_pdf_finite_flux(*x, &sol)?;
                    }
                }
                let exact = -(-p.smax_over_n).exp_m1();
                outcome.checks.push(Check::at_most("normalization", (mass - exact).abs(), 1e-6));
            } else {
                outcome.checks.push(Check::at_most("flux_residual", residual, 1e-10));
                outcome.checks.push(Check::at_most("tail_series_order2", tail_error, 0.01));
            }
        }
        Some(snl) => {
            let st = steady_pdf_with_cutoff(p.cells, p.first_width_over_n * p.n, p.n, gamma, p.eta, snl * p.n, p.closure)?;
            for (i, (&s, &pd)) in st.pdf.centres().iter().zip(&st.pdf.density).enumerate() {
                let f = 0.5 * (st.face_fluxes[i] + st.face_fluxes[i + 1]);
                csv.row([Cell::from(s), pd.into(), f.into()]);
            }
            outcome.checks.push(Check::at_most("normalization", (st.pdf.mass() - 1.0).abs(), 1e-10));
            outcome.checks.push(Check::at_most("sink_leakage_balance", st.balance_error, 1e-8));
            if snl >= 80.0 {
                outcome.set("tail_exponent_10n_80n", st.pdf.log_log_slope(10.0 * p.n, 80.0 * p.n)?);
            }
            outcome.set("leakage", st.leakage);
            outcome.set("sink_rate", st.sink_rate);
        }
    }
    out.csv("pdf.csv", csv)?;
    Ok(outcome)
}

pub fn evolve(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<RunOutcome> {
    let p = section(cfg)?;
    let gamma = p.eta / p.n;
    let (grid, boundary) = match p.snl_over_n {
        None => (AmplitudePdf::geometric(p.cells, p.first_width_over_n * p.n, p.smax_over_n * p.n)?, Boundary::ZeroFlux),
        Some(snl) => {
            let b = match p.closure {
                CutoffClosure::Absorbing => Boundary::Absorbing,
                CutoffClosure::BreakingInflow { flux } => Boundary::BreakingInflow { flux },
            };
            (AmplitudePdf::with_cutoff(p.cells, p.first_width_over_n * p.n, snl * p.n)?, b)
        }
    };
    let initial = grid.rayleigh(p.initial_n_over_n * p.n)?;
    let dt = p.dt.unwrap_or(0.5 * wtlab_core::pdf::evolve::max_stable_dt(&initial, gamma, p.eta));
    let t_end = p.t_end.unwrap_or(10.0 / gamma);
    let steps = (t_end / dt).ceil() as usize;
    let traj = evolve_pdf(&initial, gamma, p.eta, dt, t_end, boundary, snapshot_stride(steps, p.snapshots))?;
    let mut csv = Csv::new(&["t", "s", "P"]);
    for (t, d) in traj.times.iter().zip(&traj.densities) {
        for (s, v) in initial.centres().iter().zip(d) {
            csv.row([Cell::from(*t), (*s).into(), (*v).into()]);
        }
    }
    out.csv("pdf_trajectory.csv", csv)?;
    let mut flux = Csv::new(&["t", "leakage", "sink_rate"]);
    for ((t, l), r) in traj.times.iter().zip(&traj.leakage).zip(&traj.sink_rate) {
        flux.row([Cell::from(*t), (*l).into(), (*r).into()]);
    }
    out.csv("pdf_boundary.csv", flux)?;
    let final_pdf = &traj.final_pdf;
    let mut outcome = RunOutcome::default();
    outcome.checks.push(Check::at_most("mass_conservation", (final_pdf.mass() - 1.0).abs(), 1e-8));
    if p.initial_n_over_n == 1.0 && p.snl_over_n.is_none() {
        let scale = initial.density.iter().cloned().fold(0.0, f64::max);
        let change = final_pdf.density.iter().zip(&initial.density).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        outcome.checks.push(Check::at_most("rayleigh_stationarity", change / scale, 1e-8));
    }
    let n = p.n;
    outcome.set("l1_to_rayleigh", final_pdf.l1_distance(|s| rayleigh_pdf(s, n).unwrap_or(0.0)));
    outcome.set("pdf", p);
    outcome.set("dt", dt);
    outcome.set("t_end", t_end);
    outcome.set("boundary", boundary);
    Ok(outcome)
}
