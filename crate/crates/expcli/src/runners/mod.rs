//! One runner per experiment kind. Runners only orchestrate library calls,
//! write CSVs and report checks.

mod cap;
mod collision;
mod ensemble;
mod pdf;
mod scaling;

use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Result};
use wtlab_core::wave_model::SpectralGrid;

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::manifest::{RunManifest, RunOutcome};
use crate::output::OutputDir;

/// Grid mode at a lattice index; the first positive `k_x` mode by default.
pub(crate) fn mode_index(grid: &SpectralGrid, index: Option<&[i32]>) -> Result<usize> {
    let mut m = [1, 0];
    if let Some(idx) = index {
        if idx.len() != grid.dim() {
            bail!("mode index {idx:?} does not match the grid dimension {}", grid.dim());
        }
        m[..idx.len()].copy_from_slice(idx);
    }
    match grid.index_of(m) {
        Some(i) => Ok(i),
        None => bail!("mode {:?} is not on the grid", &m[..grid.dim()]),
    }
}

/// Step stride that yields about `snapshots` rows plus the final state.
pub(crate) fn snapshot_stride(steps: usize, snapshots: usize) -> usize {
    (steps / snapshots.max(1)).max(1)
}

/// Runs one experiment into `out` and writes its manifest.
pub fn run_experiment(config: &ExperimentConfig, out: &Path, threads: usize) -> Result<RunManifest> {
    let start = Instant::now();
    let mut dir = OutputDir::create(out)?;
    let outcome: RunOutcome = match config.kind {
        ExperimentKind::Rates => collision::rates(config, &mut dir)?,
        ExperimentKind::Kinetic => collision::kinetic(config, &mut dir)?,
        ExperimentKind::Moments => collision::moments(config, &mut dir)?,
        ExperimentKind::PdfSteady => pdf::steady(config, &mut dir)?,
        ExperimentKind::PdfEvolve => pdf::evolve(config, &mut dir)?,
        ExperimentKind::Ensemble => ensemble::run(config, &mut dir)?,
        ExperimentKind::CapExperiment => cap::run(config, &mut dir)?,
        ExperimentKind::Scaling => scaling::run(config, &mut dir)?,
    };
    let config_text = config.to_toml()?;
    dir.write("config.toml", config_text.as_bytes())?;
    let passed = outcome.checks.iter().all(|c| c.passed);
    for c in &outcome.checks {
        log::info!("check {}: {} (value {:e}, rule {})", c.name, if c.passed { "pass" } else { "FAIL" }, c.value, c.rule);
    }
    let manifest = RunManifest {
        kind: config.kind.name().into(),
        code_version: env!("CARGO_PKG_VERSION").into(),
        seed: config.seed,
        threads,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        config: config_text,
        conventions: outcome.conventions,
        run: outcome.run,
        checks: outcome.checks,
        passed,
        files: dir.files().to_vec(),
    };
    manifest.write(&dir)?;
    Ok(manifest)
}
