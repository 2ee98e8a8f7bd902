//! `scaling`: breakdown wavenumber and tail-area parameter over a k-range.

use anyhow::{bail, Context, Result};
use wtlab_core::wave_model::CascadeScaling;

use crate::config::ExperimentConfig;
use crate::manifest::{Check, RunOutcome};
use crate::output::{Cell, Csv, OutputDir};

pub fn run(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<RunOutcome> {
    let s = cfg.scaling.context("missing [scaling]")?;
    if !(s.k_min > 0.0 && s.k_max > s.k_min) || s.points < 2 {
        bail!("scaling: need 0 < k_min < k_max and at least 2 points");
    }
    let sc = CascadeScaling::new(s.g, s.energy_flux, s.action_flux, s.direction)?;
    let k_nl = sc.breakdown_wavenumber()?;
    let mut csv = Csv::new(&["k", "k_nl", "tail_area"]);
    let ratio = (s.k_max / s.k_min).ln() / (s.points - 1) as f64;
    for i in 0..s.points {
        let k = s.k_min * (ratio * i as f64).exp();
        csv.row([Cell::from(k), k_nl.into(), sc.tail_area_parameter(k).into()]);
    }
    out.csv("scaling.csv", csv)?;
    let mut outcome = RunOutcome::default();
    outcome.checks.push(Check::at_most("tail_area_at_k_nl", (sc.tail_area_parameter(k_nl) - 1.0).abs(), 1e-12));
    outcome.set("scaling", s);
    outcome.set("k_nl", k_nl);
    Ok(outcome)
}
