//! Conservative finite-volume evolution of `Ṗ + ∂_s F = 0`.
//!
//! The face flux uses exponential fitting (Scharfetter–Gummel): between nodes
//! `i` and `i+1` at face `s_f` with node spacing `h` and `μ = γ/η`,
//! `F = (η s_f / h) [B(μh) P_i − B(−μh) P_{i+1}]` with `B(x) = x/(eˣ − 1)`.
//! This reduces to central differences when `μh → 0` and carries zero flux
//! exactly on nodal values of `e^{−μs}`, so the Rayleigh state is a discrete
//! fixed point.

use serde::{Deserialize, Serialize};

use super::AmplitudePdf;
use crate::error::{Error, Result};

/// Treatment of the outer face `s = s_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Boundary {
    /// No flux through the outer face.
    ZeroFlux,
    /// Constant flux `F ≤ 0` entering through the breaking cutoff, balanced by
    /// a sink proportional to `P` with rate `|F| / ∫P ds`.
    BreakingInflow { flux: f64 },
    /// `P(s_max) = 0`; the leaked probability is returned as a source
    /// proportional to `P`.
    Absorbing,
}

impl Boundary {
    pub fn validate(&self) -> Result<()> {
        if let Self::BreakingInflow { flux } = self {
            if !(*flux <= 0.0 && flux.is_finite()) {
                return Err(Error::Domain(format!("breaking flux must be finite and ≤ 0, got {flux}")));
            }
        }
        Ok(())
    }
}

/// Bernoulli function `x / (eˣ − 1)`.
pub(crate) fn bernoulli(x: f64) -> f64 {
    if x.abs() < 1e-6 {
        1.0 - 0.5 * x + x * x / 12.0
    } else {
        x / x.exp_m1()
    }
}

/// Tridiagonal flux-divergence operator `dP/dt = L P + q` of one grid.
#[derive(Debug, Clone)]
pub(crate) struct Operator {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
    /// Coefficients `(a_f, b_f)` of face `f`: `F_f = a_f P_{f−1} − b_f P_f`.
    pub faces: Vec<(f64, f64)>,
    /// Constant source from an inflow boundary.
    pub source: Vec<f64>,
    pub boundary: Boundary,
}

impl Operator {
    pub fn new(pdf: &AmplitudePdf, gamma: f64, eta: f64, boundary: Boundary) -> Result<Self> {
        if !(eta > 0.0 && eta.is_finite() && gamma.is_finite()) {
            return Err(Error::Domain(format!("PDF evolution needs η > 0 and finite γ, got η = {eta}, γ = {gamma}")));
        }
        boundary.validate()?;
        let mu = gamma / eta;
        let c = pdf.centres();
        let s = pdf.faces();
        let w = pdf.widths();
        let n = pdf.cells();
        let mut faces = vec![(0.0, 0.0); n + 1];
        for f in 1..n {
            let h = c[f] - c[f - 1];
            let k = eta * s[f] / h;
            faces[f] = (k * bernoulli(mu * h), k * bernoulli(-mu * h));
        }
        let mut source = vec![0.0; n];
        match boundary {
            Boundary::ZeroFlux => {}
            Boundary::Absorbing => {
                let h = s[n] - c[n - 1];
                faces[n] = (eta * s[n] / h * bernoulli(mu * h), 0.0);
            }
            Boundary::BreakingInflow { flux } => source[n - 1] = -flux / w[n - 1],
        }
        let mut lower = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut upper = vec![0.0; n];
        for i in 0..n {
            let (a_in, b_in) = faces[i];
            let (a_out, b_out) = faces[i + 1];
            lower[i] = a_in / w[i];
            diag[i] = -(b_in + a_out) / w[i];
            upper[i] = b_out / w[i];
        }
        Ok(Self { lower, diag, upper, faces, source, boundary })
    }

    #[cfg(test)]
    pub fn apply(&self, p: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; p.len()];
        self.apply_into(p, &mut out);
        out
    }

    pub fn apply_into(&self, p: &[f64], out: &mut [f64]) {
        let n = p.len();
        for i in 0..n {
            let mut v = self.diag[i] * p[i] + self.source[i];
            if i > 0 {
                v += self.lower[i] * p[i - 1];
            }
            if i + 1 < n {
                v += self.upper[i] * p[i + 1];
            }
            out[i] = v;
        }
    }

    /// Face fluxes `F_0 … F_N`, positive towards larger `s`.
    pub fn face_fluxes(&self, p: &[f64]) -> Vec<f64> {
        let n = p.len();
        let mut out = vec![0.0; n + 1];
        for f in 1..n {
            let (a, b) = self.faces[f];
            out[f] = a * p[f - 1] - b * p[f];
        }
        out[n] = match self.boundary {
            Boundary::ZeroFlux => 0.0,
            Boundary::Absorbing => self.faces[n].0 * p[n - 1],
            Boundary::BreakingInflow { flux } => flux,
        };
        out
    }

    /// Net probability leaving through the outer face per unit time.
    pub fn leakage(&self, p: &[f64]) -> f64 {
        match self.boundary {
            Boundary::ZeroFlux => 0.0,
            Boundary::Absorbing => self.faces[p.len()].0 * p[p.len() - 1],
            Boundary::BreakingInflow { flux } => flux,
        }
    }
}

/// Face fluxes of a density, including the boundary face.
pub fn face_fluxes(pdf: &AmplitudePdf, gamma: f64, eta: f64, boundary: Boundary) -> Result<Vec<f64>> {
    Ok(Operator::new(pdf, gamma, eta, boundary)?.face_fluxes(&pdf.density))
}

/// Largest stable explicit step `0.25 · min(Δs²/(ηs), Δs/(γs))`.
pub fn max_stable_dt(pdf: &AmplitudePdf, gamma: f64, eta: f64) -> f64 {
    let s = pdf.faces();
    pdf.widths()
        .iter()
        .enumerate()
        .map(|(i, w)| {
            let si = s[i + 1];
            let diffusive = if eta > 0.0 { w * w / (eta * si) } else { f64::INFINITY };
            let advective = if gamma != 0.0 { w / (gamma.abs() * si) } else { f64::INFINITY };
            diffusive.min(advective)
        })
        .fold(f64::INFINITY, f64::min)
        * 0.25
}

#[derive(Debug, Clone, PartialEq)]
pub struct PdfTrajectory {
    pub times: Vec<f64>,
    pub densities: Vec<Vec<f64>>,
    /// Outer-face flux at each snapshot.
    pub leakage: Vec<f64>,
    /// Proportional sink (negative: source) rate at each snapshot.
    pub sink_rate: Vec<f64>,
    pub final_pdf: AmplitudePdf,
}

/// Forward-Euler evolution to `t_end`, storing a snapshot every
/// `snapshot_every` steps and at the end.
pub fn evolve_pdf(
    pdf: &AmplitudePdf,
    gamma: f64,
    eta: f64,
    dt: f64,
    t_end: f64,
    boundary: Boundary,
    snapshot_every: usize,
) -> Result<PdfTrajectory> {
    let op = Operator::new(pdf, gamma, eta, boundary)?;
    let limit = max_stable_dt(pdf, gamma, eta);
    if !(dt > 0.0) || dt > limit {
        return Err(Error::StabilityGuard(format!("dt = {dt:e} exceeds the explicit limit {limit:e}")));
    }
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::Domain(format!("end time must be non-negative, got {t_end}")));
    }
    let steps = (t_end / dt - 1e-9).ceil().max(0.0) as usize;
    let every = snapshot_every.max(1);
    let mut p = pdf.density.clone();
    let widths = pdf.widths().to_vec();
    let mass = |p: &[f64]| p.iter().zip(&widths).map(|(a, b)| a * b).sum::<f64>();
    let sink = |p: &[f64]| {
        let m = mass(p);
        if m > 0.0 {
            -op.leakage(p) / m
        } else {
            0.0
        }
    };
    let mut out = PdfTrajectory {
        times: vec![0.0],
        densities: vec![p.clone()],
        leakage: vec![op.leakage(&p)],
        sink_rate: vec![sink(&p)],
        final_pdf: pdf.clone(),
    };
    let mut t = 0.0;
    let mut rhs = vec![0.0; p.len()];
    for step in 0..steps {
        let h = if step + 1 == steps { t_end - t } else { dt };
        let lambda = sink(&p);
        op.apply_into(&p, &mut rhs);
        for i in 0..p.len() {
            p[i] += h * (rhs[i] - lambda * p[i]);
        }
        if let Some(cell) = p.iter().position(|v| *v < -1e-12) {
            return Err(Error::NegativeDensity { cell, value: p[cell] });
        }
        t = if step + 1 == steps { t_end } else { t + h };
        if (step + 1) % every == 0 || step + 1 == steps {
            out.times.push(t);
            out.densities.push(p.clone());
            out.leakage.push(op.leakage(&p));
            out.sink_rate.push(sink(&p));
        }
    }
    out.final_pdf.density = p;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bernoulli_is_smooth_and_balanced() {
        for x in [1e-7, 1e-6 * 1.0001, 0.3, 5.0] {
            // B(−x) = B(x) + x
            assert!((bernoulli(-x) - bernoulli(x) - x).abs() < 1e-12);
        }
        let (a, b) = (1e-6 * 0.9999, 1e-6 * 1.0001);
        assert!((bernoulli(a) - bernoulli(b) - 0.5 * (b - a)).abs() < 1e-14);
    }

    #[test]
    fn operator_conserves_mass_with_zero_flux() {
        let pdf = AmplitudePdf::geometric(60, 1e-3, 30.0).unwrap().from_fn(|s| (-(s - 3.0).powi(2)).exp()).unwrap();
        let op = Operator::new(&pdf, 1.0, 2.0, Boundary::ZeroFlux).unwrap();
        let rate: f64 = op.apply(&pdf.density).iter().zip(pdf.widths()).map(|(r, w)| r * w).sum();
        assert!(rate.abs() < 1e-13);
    }

    #[test]
    fn guard_rejects_large_steps() {
        let pdf = AmplitudePdf::geometric(60, 1e-3, 30.0).unwrap().rayleigh(1.0).unwrap();
        let limit = max_stable_dt(&pdf, 1.0, 1.0);
        assert!(matches!(evolve_pdf(&pdf, 1.0, 1.0, 2.0 * limit, 1.0, Boundary::ZeroFlux, 1), Err(Error::StabilityGuard(_))));
    }
}
