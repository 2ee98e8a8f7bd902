use anyhow::Result;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::output::{write_atomic, FileEntry, OutputDir};

/// Name of the manifest written next to the outputs.
pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    /// Human-readable acceptance rule, e.g. `<= 1e-8`.
    pub rule: String,
}

impl Check {
    pub fn at_most(name: &str, value: f64, limit: f64) -> Self {
        Self { name: name.into(), passed: value <= limit, value, rule: format!("<= {limit:e}") }
    }

    pub fn above(name: &str, value: f64, limit: f64) -> Self {
        Self { name: name.into(), passed: value > limit, value, rule: format!("> {limit:e}") }
    }

    pub fn flag(name: &str, passed: bool) -> Self {
        Self { name: name.into(), passed, value: if passed { 1.0 } else { 0.0 }, rule: "pass".into() }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Conventions {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_convention: Option<String>,
    /// Factor between lattice sums and continuum integrals.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub discrete_normalization: Option<f64>,
    /// How empirical PDFs are scaled against the Rayleigh reference.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rayleigh_reference: Option<String>,
}

/// What a runner reports besides the files it wrote.
#[derive(Debug, Clone, Default)]
pub struct RunOutcome {
    pub checks: Vec<Check>,
    pub conventions: Conventions,
    /// Run parameters: realizations, grid, model, scheme, dt, cap policy.
    pub run: Map<String, Value>,
}

impl RunOutcome {
    pub fn set(&mut self, key: &str, value: impl Serialize) {
        self.run.insert(key.into(), serde_json::to_value(value).expect("serializable run parameter"));
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub kind: String,
    pub code_version: String,
    pub seed: Option<u64>,
    pub threads: usize,
    pub wall_clock_seconds: f64,
    /// Config snapshot with defaults filled, as TOML.
    pub config: String,
    pub conventions: Conventions,
    pub run: Map<String, Value>,
    pub checks: Vec<Check>,
    pub passed: bool,
    pub files: Vec<FileEntry>,
}

impl RunManifest {
    pub fn write(&self, out: &OutputDir) -> Result<()> {
        let text = serde_json::to_string_pretty(self)? + "\n";
        write_atomic(&out.root().join(MANIFEST), text.as_bytes())
    }
}
