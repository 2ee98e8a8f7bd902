//! Theory-versus-empirical PDF comparison.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use wtlab_core::stats::linear_fit;

use crate::output::{float, OutputDir};

/// A density on an increasing `s` grid, optionally with standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub s: Vec<f64>,
    pub p: Vec<f64>,
    pub stderr: Option<Vec<f64>>,
}

impl Series {
    pub fn new(s: Vec<f64>, p: Vec<f64>, stderr: Option<Vec<f64>>) -> Result<Self> {
        if s.len() != p.len() || stderr.as_ref().is_some_and(|e| e.len() != s.len()) {
            bail!("series columns differ in length");
        }
        if s.is_empty() || s.windows(2).any(|w| !(w[1] > w[0])) {
            bail!("series needs a non-empty, strictly increasing s column");
        }
        Ok(Self { s, p, stderr })
    }

    /// Linear interpolation; `None` outside the grid.
    pub fn at(&self, x: f64) -> Option<f64> {
        let (first, last) = (self.s[0], *self.s.last()?);
        if x < first || x > last {
            return None;
        }
        let i = self.s.partition_point(|v| *v <= x);
        if i == 0 {
            return Some(self.p[0]);
        }
        let i = i - 1;
        if i + 1 == self.s.len() || self.s[i] == x {
            return Some(self.p[i]);
        }
        let t = (x - self.s[i]) / (self.s[i + 1] - self.s[i]);
        Some(self.p[i] + t * (self.p[i + 1] - self.p[i]))
    }
}

/// Reads the `s`, `P` and optional `stderr` columns of a CSV with a header row.
pub fn read_series(path: &Path) -> Result<Series> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<&str> = lines.next().context("empty CSV")?.split(',').map(str::trim).collect();
    let col = |name: &str| header.iter().position(|h| *h == name);
    let (si, pi) = match (col("s"), col("P")) {
        (Some(s), Some(p)) => (s, p),
        _ => bail!("{}: needs columns `s` and `P`", path.display()),
    };
    let ei = col("stderr");
    let (mut s, mut p, mut e) = (Vec::new(), Vec::new(), Vec::new());
    for (row, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let get = |i: usize| -> Result<f64> {
            let f = fields.get(i).with_context(|| format!("row {} is short", row + 2))?;
            f.parse().with_context(|| format!("row {}: `{f}` is not a number", row + 2))
        };
        s.push(get(si)?);
        p.push(get(pi)?);
        if let Some(i) = ei {
            e.push(get(i)?);
        }
    }
    Series::new(s, p, ei.map(|_| e))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailFit {
    pub window: (f64, f64),
    pub exponent: f64,
    pub stderr: f64,
    pub ci: (f64, f64),
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareReport {
    /// Empirical points inside the theory grid.
    pub points: usize,
    pub sup_distance: f64,
    pub l1_distance: f64,
    /// `(P_emp − P_theory)/stderr` for points with a positive error.
    pub z_scores: Vec<f64>,
    pub fraction_within_3sigma: Option<f64>,
    pub tail_fit: Option<TailFit>,
    #[serde(skip)]
    pub rows: Vec<[f64; 5]>,
}

/// Compares `empirical` against `theory` interpolated onto the empirical grid.
pub fn compare_report(theory: &Series, empirical: &Series, tail_window: Option<(f64, f64)>, confidence: f64) -> Result<CompareReport> {
    let mut rows = Vec::new();
    for (i, &s) in empirical.s.iter().enumerate() {
        if let Some(pt) = theory.at(s) {
            let se = empirical.stderr.as_ref().map_or(f64::NAN, |e| e[i]);
            let z = if se > 0.0 { (empirical.p[i] - pt) / se } else { f64::NAN };
            rows.push([s, pt, empirical.p[i], se, z]);
        }
    }
    if rows.is_empty() {
        bail!("disjoint supports: no empirical point lies on the theory grid");
    }
    let sup_distance = rows.iter().map(|r| (r[2] - r[1]).abs()).fold(0.0, f64::max);
    let l1_distance = rows.windows(2).map(|w| 0.5 * ((w[0][2] - w[0][1]).abs() + (w[1][2] - w[1][1]).abs()) * (w[1][0] - w[0][0])).sum();
    let z_scores: Vec<f64> = rows.iter().map(|r| r[4]).filter(|z| z.is_finite()).collect();
    let fraction_within_3sigma =
        (!z_scores.is_empty()).then(|| z_scores.iter().filter(|z| z.abs() <= 3.0).count() as f64 / z_scores.len() as f64);
    let tail_fit = match tail_window {
        None => None,
        Some((lo, hi)) => {
            let (x, y): (Vec<f64>, Vec<f64>) = empirical
                .s
                .iter()
                .zip(&empirical.p)
                .filter(|(s, p)| **s >= lo && **s <= hi && **p > 0.0)
                .map(|(s, p)| (s.ln(), p.ln()))
                .unzip();
            if x.len() < 3 {
                bail!("tail window [{lo}, {hi}] holds {} positive points, need 3", x.len());
            }
            let fit = linear_fit(&x, &y, confidence)?;
            Some(TailFit { window: (lo, hi), exponent: fit.slope, stderr: fit.slope_stderr, ci: fit.slope_ci, points: x.len() })
        }
    };
    Ok(CompareReport { points: rows.len(), sup_distance, l1_distance, z_scores, fraction_within_3sigma, tail_fit, rows })
}

/// Writes `compare.json` and the whitespace-separated `compare.dat`.
pub fn write_report(report: &CompareReport, out: &mut OutputDir) -> Result<()> {
    let mut dat = String::from("# s P_theory P_empirical stderr z\n");
    for r in &report.rows {
        dat.push_str(&r.iter().map(|v| float(*v)).collect::<Vec<_>>().join(" "));
        dat.push('\n');
    }
    out.write("compare.dat", dat.as_bytes())?;
    let json = serde_json::to_string_pretty(report)? + "\n";
    out.write("compare.json", json.as_bytes())
}
