//! Kinetic equation `ṅ = η − γn`, the one-point moment hierarchy
//! `Ṁ⁽ᵖ⁾ = −pγM⁽ᵖ⁾ + p²ηM⁽ᵖ⁻¹⁾` and the generating function
//! `Z(λ) = ⟨e^{λ|a|²}⟩`, which obeys `Ż = ληZ + (λ²η − λγ)Z_λ`.

use crate::collision::{CollisionRates, Spectrum};
use crate::error::{Error, Result};

/// Largest `dt · max|γ|` accepted by the explicit integrators.
pub const STABILITY_LIMIT: f64 = 0.1;

fn check_stability(dt: f64, gamma_max: f64) -> Result<()> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Domain(format!("time step must be positive, got {dt}")));
    }
    if dt * gamma_max >= STABILITY_LIMIT {
        return Err(Error::StabilityGuard(format!("dt·max|γ| = {:.4} exceeds {STABILITY_LIMIT}", dt * gamma_max)));
    }
    Ok(())
}

fn step_count(t_end: f64, dt: f64) -> Result<usize> {
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::Domain(format!("end time must be non-negative, got {t_end}")));
    }
    Ok((t_end / dt - 1e-9).ceil().max(0.0) as usize)
}

pub fn kinetic_rhs(rates: &CollisionRates, spectrum: &Spectrum) -> Result<Vec<f64>> {
    if rates.len() != spectrum.len() {
        return Err(Error::SizeMismatch { expected: rates.len(), actual: spectrum.len() });
    }
    Ok(rates.eta.iter().zip(&rates.gamma).zip(spectrum.values()).map(|((e, g), n)| e - g * n).collect())
}

/// Sampled spectrum trajectory; `spectra[i]` is the state at `times[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumTrajectory {
    pub times: Vec<f64>,
    pub spectra: Vec<Vec<f64>>,
    /// Number of individual negative values clipped to zero.
    pub clipped: usize,
}

impl SpectrumTrajectory {
    pub fn last(&self) -> &[f64] {
        self.spectra.last().expect("trajectory holds the initial state")
    }
}

/// RK4 integration of the kinetic equation with rates recomputed at every
/// stage by `rates_of` (self-consistent evolution). The final step is
/// shortened to land on `t_end`.
pub fn evolve_spectrum<R>(spectrum: &Spectrum, t_end: f64, dt: f64, mut rates_of: R) -> Result<SpectrumTrajectory>
where
    R: FnMut(&Spectrum) -> Result<CollisionRates>,
{
    let steps = step_count(t_end, dt)?;
    let mut n = spectrum.values().to_vec();
    let mut traj = SpectrumTrajectory { times: vec![0.0], spectra: vec![n.clone()], clipped: 0 };
    let mut t = 0.0;
    let mut rhs = |state: &[f64], guard: Option<f64>| -> Result<Vec<f64>> {
        let s = Spectrum::new(state.iter().map(|v| v.max(0.0)).collect())?;
        let rates = rates_of(&s)?;
        if let Some(h) = guard {
            check_stability(h, rates.gamma.iter().fold(0.0, |a, g| a.max(g.abs())))?;
        }
        kinetic_rhs(&rates, &s)
    };
    for i in 0..steps {
        let h = if i + 1 == steps { t_end - t } else { dt };
        let k1 = rhs(&n, Some(dt))?;
        let k2 = rhs(&axpy(&n, 0.5 * h, &k1), None)?;
        let k3 = rhs(&axpy(&n, 0.5 * h, &k2), None)?;
        let k4 = rhs(&axpy(&n, h, &k3), None)?;
        for j in 0..n.len() {
            n[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        let negatives = n.iter().filter(|v| **v < 0.0).count();
        if negatives > 0 {
            log::warn!("clipping {negatives} negative spectral values at t = {:.6e}", t + h);
            n.iter_mut().for_each(|v| *v = v.max(0.0));
            traj.clipped += negatives;
        }
        t = if i + 1 == steps { t_end } else { t + h };
        traj.times.push(t);
        traj.spectra.push(n.clone());
    }
    Ok(traj)
}

fn axpy(x: &[f64], a: f64, y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(x, y)| x + a * y).collect()
}

/// One-point moments `M⁽⁰⁾ … M⁽ᵖᵐᵃˣ⁾` of a single mode, `M⁽ᵖ⁾ = ⟨|a|^{2p}⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentVector {
    values: Vec<f64>,
}

impl MomentVector {
    /// `M0` within `1e-12` of one is accepted and set to one.
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::Domain("moment vector needs at least M0 and M1".into()));
        }
        if (values[0] - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("M0 must equal 1, got {}", values[0])));
        }
        if let Some((p, v)) = values.iter().enumerate().find(|(_, v)| !(**v >= 0.0 && v.is_finite())) {
            return Err(Error::Domain(format!("moment M{p} = {v} is not a finite non-negative value")));
        }
        values[0] = 1.0;
        Ok(Self { values })
    }

    /// Moments of the exponential intensity law, `M⁽ᵖ⁾ = p! nᵖ`.
    pub fn gaussian(n: f64, pmax: usize) -> Result<Self> {
        let mut values = vec![1.0];
        for p in 1..=pmax {
            values.push(values[p - 1] * p as f64 * n);
        }
        Self::new(values)
    }

    pub fn pmax(&self) -> usize {
        self.values.len() - 1
    }

    pub fn get(&self, p: usize) -> f64 {
        self.values[p]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn action(&self) -> f64 {
        self.values[1]
    }

    /// Largest violation of `M⁽ᵖ⁾² ≤ M⁽ᵖ⁻¹⁾M⁽ᵖ⁺¹⁾`, relative to the right side.
    pub fn cauchy_schwarz_violation(&self) -> f64 {
        let m = &self.values;
        (1..m.len() - 1)
            .map(|p| (m[p] * m[p] - m[p - 1] * m[p + 1]) / (m[p - 1] * m[p + 1]).max(f64::MIN_POSITIVE))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// `dM⁽ᵖ⁾/dt`; zero for `p = 0`.
pub fn moment_rhs(p: usize, moments: &MomentVector, eta: f64, gamma: f64) -> Result<f64> {
    if p > moments.pmax() {
        return Err(Error::Domain(format!("order {p} exceeds the stored pmax {}", moments.pmax())));
    }
    Ok(rhs_row(p, moments.values(), eta, gamma))
}

#[inline]
fn rhs_row(p: usize, m: &[f64], eta: f64, gamma: f64) -> f64 {
    if p == 0 {
        return 0.0;
    }
    let pf = p as f64;
    pf * pf * eta * m[p - 1] - pf * gamma * m[p]
}

fn rhs_all(m: &[f64], eta: f64, gamma: f64) -> Vec<f64> {
    (0..m.len()).map(|p| rhs_row(p, m, eta, gamma)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentTrajectory {
    pub times: Vec<f64>,
    pub moments: Vec<Vec<f64>>,
}

/// RK4 integration of the hierarchy up to the stored `pmax` with externally
/// supplied rates `t ↦ (η(t), γ(t))`.
pub fn evolve_moments<R>(moments: &MomentVector, t_end: f64, dt: f64, rates: R) -> Result<MomentTrajectory>
where
    R: Fn(f64) -> (f64, f64),
{
    let steps = step_count(t_end, dt)?;
    let mut m = moments.values().to_vec();
    let mut traj = MomentTrajectory { times: vec![0.0], moments: vec![m.clone()] };
    let mut t = 0.0;
    for i in 0..steps {
        let h = if i + 1 == steps { t_end - t } else { dt };
        let (e1, g1) = rates(t);
        check_stability(dt, g1.abs())?;
        let (e2, g2) = rates(t + 0.5 * h);
        let (e4, g4) = rates(t + h);
        let k1 = rhs_all(&m, e1, g1);
        let k2 = rhs_all(&axpy(&m, 0.5 * h, &k1), e2, g2);
        let k3 = rhs_all(&axpy(&m, 0.5 * h, &k2), e2, g2);
        let k4 = rhs_all(&axpy(&m, h, &k3), e4, g4);
        for j in 1..m.len() {
            m[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        t = if i + 1 == steps { t_end } else { t + h };
        traj.times.push(t);
        traj.moments.push(m.clone());
    }
    Ok(traj)
}

/// Frozen rates for [`evolve_moments`].
pub fn frozen(eta: f64, gamma: f64) -> impl Fn(f64) -> (f64, f64) {
    move |_| (eta, gamma)
}

/// `Z(λ) = 1/(1 − λn)`.
pub fn steady_generating_function(lambda: f64, n: f64) -> Result<f64> {
    if lambda * n >= 1.0 {
        return Err(Error::Domain(format!("λn = {} ≥ 1: moments diverge", lambda * n)));
    }
    Ok(1.0 / (1.0 - lambda * n))
}

/// `dZ/dλ` on a (possibly non-uniform) grid: three-point centered
/// differences inside, second-order one-sided at the ends.
fn derivative_on_grid(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let three_point = |i0: usize, at: usize| {
        let (a, b, c) = (x[i0], x[i0 + 1], x[i0 + 2]);
        let t = x[at];
        y[i0] * (2.0 * t - b - c) / ((a - b) * (a - c))
            + y[i0 + 1] * (2.0 * t - a - c) / ((b - a) * (b - c))
            + y[i0 + 2] * (2.0 * t - a - b) / ((c - a) * (c - b))
    };
    (0..n)
        .map(|i| match i {
            0 => three_point(0, 0),
            i if i == n - 1 => three_point(n - 3, n - 1),
            i => three_point(i - 1, i),
        })
        .collect()
}

/// Sup-norm of `Ż − ληZ − (λ²η − λγ)Z_λ` over the λ-grid.
pub fn generating_function_residual(lambdas: &[f64], z: &[f64], dz_dt: &[f64], eta: f64, gamma: f64) -> Result<f64> {
    if lambdas.len() < 5 {
        return Err(Error::GridTooCoarse(format!("need at least 5 λ points, got {}", lambdas.len())));
    }
    if z.len() != lambdas.len() {
        return Err(Error::SizeMismatch { expected: lambdas.len(), actual: z.len() });
    }
    if dz_dt.len() != lambdas.len() {
        return Err(Error::SizeMismatch { expected: lambdas.len(), actual: dz_dt.len() });
    }
    if lambdas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("λ-grid must be strictly increasing".into()));
    }
    let zl = derivative_on_grid(lambdas, z);
    Ok((0..lambdas.len())
        .map(|i| {
            let l = lambdas[i];
            (dz_dt[i] - l * eta * z[i] - (l * l * eta - l * gamma) * zl[i]).abs()
        })
        .fold(0.0, f64::max))
}

/// Coefficients `c_q` with `dM⁽ᵖ⁾/dt = Σ_q c_q M⁽q⁾` obtained by applying the
/// generating-function operator to the power series `Σ λ^q M⁽q⁾ / q!` and
/// reading off the `λᵖ` coefficient.
pub fn hierarchy_from_generating_equation(p: usize, eta: f64, gamma: f64) -> Vec<f64> {
    let factorial = |k: usize| (1..=k).fold(1.0, |a, i| a * i as f64);
    (0..=p)
        .map(|q| {
            // basis series λ^q / q!, stored as coefficients
            let mut basis = vec![0.0; p + 2];
            basis[q] = 1.0 / factorial(q);
            let mut deriv = vec![0.0; p + 2];
            for j in 1..basis.len() {
                deriv[j - 1] = j as f64 * basis[j];
            }
            let mut out = vec![0.0; p + 2];
            for j in 0..=p {
                out[j + 1] += eta * basis[j];
                if j + 2 < out.len() {
                    out[j + 2] += eta * deriv[j];
                }
                out[j + 1] -= gamma * deriv[j];
            }
            factorial(p) * out[p]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moment_rhs_examples() {
        let m = MomentVector::new(vec![1.0, 1.0, 0.0]).unwrap();
        assert_eq!(moment_rhs(2, &m, 1.0, 1.0).unwrap(), 4.0);
        assert_eq!(moment_rhs(0, &m, 1.0, 1.0).unwrap(), 0.0);
        assert!(moment_rhs(3, &m, 1.0, 1.0).is_err());
    }

    #[test]
    fn generating_function_examples() {
        assert_eq!(steady_generating_function(0.0, 3.0).unwrap(), 1.0);
        assert_eq!(steady_generating_function(0.5, 1.0).unwrap(), 2.0);
        assert!(steady_generating_function(1.0, 1.0).is_err());
    }

    #[test]
    fn derivative_is_exact_for_quadratics() {
        let x = [0.0, 0.1, 0.3, 0.35, 0.6];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v * v - v + 3.0).collect();
        for (xi, d) in x.iter().zip(derivative_on_grid(&x, &y)) {
            assert!((d - (4.0 * xi - 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn step_count_lands_on_end() {
        assert_eq!(step_count(1.0, 0.1).unwrap(), 10);
        assert_eq!(step_count(1.05, 0.1).unwrap(), 11);
        assert_eq!(step_count(0.0, 0.1).unwrap(), 0);
    }
}
