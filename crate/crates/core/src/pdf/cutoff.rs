//! Steady PDF with a wave-breaking ceiling at `s_nl`.
//!
//! Two closures of the ceiling are available. [`CutoffClosure::BreakingInflow`]
//! injects a constant downward flux `F ≤ 0` at `s_nl` and removes it again
//! through a sink `λP` with `λ = |F|` (unit mass). This produces the
//! constant-flux `1/s` range below the ceiling. [`CutoffClosure::Absorbing`]
//! sets `P(s_nl) = 0` and returns the leaked probability in proportion to `P`.
//! This is the quasi-stationary state of the absorbing problem.

use serde::{Deserialize, Serialize};

use super::evolve::{Boundary, Operator};
use super::{exp_integral_ei, AmplitudePdf, FluxSolution};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CutoffClosure {
    BreakingInflow { flux: f64 },
    Absorbing,
}

impl CutoffClosure {
    fn boundary(&self) -> Boundary {
        match *self {
            Self::BreakingInflow { flux } => Boundary::BreakingInflow { flux },
            Self::Absorbing => Boundary::Absorbing,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CutoffSteadyState {
    pub pdf: AmplitudePdf,
    /// Outer-face flux (negative for inflow).
    pub leakage: f64,
    /// Proportional sink rate `λ` (negative: source).
    pub sink_rate: f64,
    /// `|λ·∫P ds + F_outer| / |F_outer|`; zero when no probability crosses the ceiling.
    pub balance_error: f64,
    /// Face fluxes at the steady state.
    pub face_fluxes: Vec<f64>,
}

/// Steady state on `cells` geometric cells over `[0, s_nl]`.
#[allow(clippy::too_many_arguments)]
pub fn steady_pdf_with_cutoff(
    cells: usize,
    first_width: f64,
    n: f64,
    gamma: f64,
    eta: f64,
    s_nl: f64,
    closure: CutoffClosure,
) -> Result<CutoffSteadyState> {
    if !(n > 0.0) {
        return Err(Error::Domain(format!("mean intensity must be positive, got {n}")));
    }
    if s_nl < 5.0 * n {
        return Err(Error::Domain(format!("cutoff s_nl = {s_nl} must be at least 5n")));
    }
    if s_nl < 20.0 * n {
        log::warn!("cutoff s_nl/n = {:.2} leaves no room for a tail region", s_nl / n);
    }
    let mut pdf = AmplitudePdf::with_cutoff(cells, first_width, s_nl)?;
    let op = Operator::new(&pdf, gamma, eta, closure.boundary())?;
    let (density, sink_rate) = match closure {
        CutoffClosure::BreakingInflow { flux: 0.0 } => (zero_flux_equilibrium(&op, cells), 0.0),
        CutoffClosure::BreakingInflow { flux } => {
            let lambda = -flux;
            let diag: Vec<f64> = op.diag.iter().map(|d| d - lambda).collect();
            let rhs: Vec<f64> = op.source.iter().map(|q| -q).collect();
            (thomas(&op.lower, &diag, &op.upper, &rhs)?, lambda)
        }
        CutoffClosure::Absorbing => quasi_stationary(&op, pdf.widths())?,
    };
    pdf.density = density;
    let mass = pdf.mass();
    if closure == CutoffClosure::Absorbing {
        pdf.normalize()?;
    }
    if let Some((cell, value)) = pdf.density.iter().cloned().enumerate().find(|(_, v)| *v < -1e-12) {
        return Err(Error::NegativeDensity { cell, value });
    }
    let face_fluxes = op.face_fluxes(&pdf.density);
    let leakage = face_fluxes[cells];
    let sink_total = sink_rate * pdf.mass();
    let balance_error = if leakage == 0.0 { 0.0 } else { (sink_total + leakage).abs() / leakage.abs() };
    log::debug!("cutoff steady state: raw mass {mass:.15}, sink {sink_total:e}, leakage {leakage:e}");
    Ok(CutoffSteadyState { pdf, leakage, sink_rate, balance_error, face_fluxes })
}

/// Discrete state with every face flux equal to zero, normalized.
fn zero_flux_equilibrium(op: &Operator, cells: usize) -> Vec<f64> {
    let mut p = vec![1.0; cells];
    for f in 1..cells {
        let (a, b) = op.faces[f];
        p[f] = p[f - 1] * a / b;
    }
    p
}

/// Principal eigenvector of the absorbing operator by inverse iteration;
/// returns the unit-mass density and the reinjection rate `−leakage/mass`
/// as a negative sink.
fn quasi_stationary(op: &Operator, widths: &[f64]) -> Result<(Vec<f64>, f64)> {
    let n = widths.len();
    let mass = |p: &[f64]| p.iter().zip(widths).map(|(a, b)| a * b).sum::<f64>();
    let mut p = vec![1.0; n];
    let mut rate = 0.0;
    for _ in 0..500 {
        let x = thomas(&op.lower, &op.diag, &op.upper, &p)?;
        let m = mass(&x);
        p = x.iter().map(|v| v / m).collect();
        let next_rate = -op.leakage(&p);
        let converged = (next_rate - rate).abs() <= 1e-14 * next_rate.abs();
        rate = next_rate;
        if converged {
            break;
        }
    }
    Ok((p, rate))
}

/// Tridiagonal solve; `lower[0]` and `upper[n-1]` are ignored.
pub(crate) fn thomas(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut denom = diag[0];
    if denom == 0.0 {
        return Err(Error::Domain("singular tridiagonal system".into()));
    }
    c[0] = upper[0] / denom;
    d[0] = rhs[0] / denom;
    for i in 1..n {
        denom = diag[i] - lower[i] * c[i - 1];
        if denom == 0.0 {
            return Err(Error::Domain("singular tridiagonal system".into()));
        }
        c[i] = if i + 1 < n { upper[i] / denom } else { 0.0 };
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / denom;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    Ok(x)
}

/// Residual of the constant-flux equation for two alternative closed forms,
/// `[C − F Ei(s/n − ln s)/η] e^{−s/n}` and `[C − F (Ei(s/n) − ln s)/η] e^{−s/n}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlternativeForms {
    /// sup over the sample points of `|−s(γP + ηP′) − F| / |F|`.
    pub ei_of_shifted_argument: f64,
    pub ei_minus_log: f64,
}

pub fn alternative_form_residuals(sol: &FluxSolution, s_points: &[f64]) -> Result<AlternativeForms> {
    if sol.flux == 0.0 {
        return Err(Error::Domain("the alternative forms differ only for nonzero flux".into()));
    }
    let (n, eta, gamma, f, c) = (sol.n, sol.eta, sol.gamma, sol.flux, sol.homogeneous);
    let mut out = AlternativeForms { ei_of_shifted_argument: 0.0, ei_minus_log: 0.0 };
    for &s in s_points {
        if s <= 0.0 {
            return Err(Error::LogSingularity);
        }
        let x = s / n;
        let decay = (-x).exp();
        let u = x - s.ln();
        let pa = (c - f / eta * exp_integral_ei(u)?) * decay;
        let dpa = -f / eta * u.exp() / u * (1.0 / n - 1.0 / s) * decay - pa / n;
        let pb = (c - f / eta * (exp_integral_ei(x)? - s.ln())) * decay;
        let dpb = -f / eta * ((x.exp() / x) / n - 1.0 / s) * decay - pb / n;
        let ra = (-s * (gamma * pa + eta * dpa) - f).abs() / f.abs();
        let rb = (-s * (gamma * pb + eta * dpb) - f).abs() / f.abs();
        out.ei_of_shifted_argument = out.ei_of_shifted_argument.max(ra);
        out.ei_minus_log = out.ei_minus_log.max(rb);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thomas_solves_a_small_system() {
        let x = thomas(&[0.0, 1.0, 1.0], &[4.0, 4.0, 4.0], &[1.0, 1.0, 0.0], &[5.0, 6.0, 5.0]).unwrap();
        for v in x {
            assert!((v - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_cutoff_close_to_n() {
        let r = steady_pdf_with_cutoff(100, 1e-3, 1.0, 1.0, 1.0, 3.0, CutoffClosure::Absorbing);
        assert!(matches!(r, Err(Error::Domain(_))));
    }
}
