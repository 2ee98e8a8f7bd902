//! Continuum quadrature over the resonant manifold for isotropic 2D spectra.
//!
//! With `P = (k + k₁)/2` the partners are written `k₂ = P + r ê(θ)`,
//! `k₃ = P − r ê(θ)`, so momentum conservation holds identically and
//! `d²k₂ = r dr dθ`. For each outer node `k₁` and angle `θ` the frequency
//! delta is resolved by locating the roots of the mismatch in `r` and
//! weighting each by `r / |∂ω̃/∂r|`.
//!
//! A quadruple contributes only when `k₁`, `k₂` and `k₃` all lie in the
//! integration domain, which mirrors the truncation of a finite lattice.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{CollisionRates, GammaConvention, RateProvenance};
use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre_on;
use crate::wave_model::{WaveModel, Wavevector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainShape {
    /// `|k| ≤ k_max`.
    #[default]
    Disk,
    /// `max(|k_x|, |k_y|) ≤ k_max`.
    Square,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSpec {
    /// Gauss–Legendre nodes per integration dimension.
    pub nodes: usize,
    /// Relative tolerance of the radial root finder.
    pub root_tol: f64,
    pub k_max: f64,
    #[serde(default)]
    pub domain: DomainShape,
    /// Samples of the radial bracket scan.
    #[serde(default = "default_radial_samples")]
    pub radial_samples: usize,
}

fn default_radial_samples() -> usize {
    96
}

impl QuadratureSpec {
    pub fn new(nodes: usize, root_tol: f64, k_max: f64, domain: DomainShape) -> Result<Self> {
        let spec = Self { nodes, root_tol, k_max, domain, radial_samples: default_radial_samples() };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes < 2 {
            return Err(Error::Domain(format!("quadrature needs at least 2 nodes, got {}", self.nodes)));
        }
        if !(self.root_tol > 0.0 && self.root_tol < 1.0) {
            return Err(Error::Domain(format!("root tolerance must lie in (0, 1), got {}", self.root_tol)));
        }
        if !(self.k_max > 0.0 && self.k_max.is_finite()) {
            return Err(Error::Domain(format!("k_max must be positive, got {}", self.k_max)));
        }
        if self.radial_samples < 4 {
            return Err(Error::Domain("radial scan needs at least 4 samples".into()));
        }
        Ok(())
    }

    fn contains(&self, k: &Wavevector) -> bool {
        match self.domain {
            DomainShape::Disk => k.norm() <= self.k_max * (1.0 + 1e-12),
            DomainShape::Square => k.x.abs().max(k.y.abs()) <= self.k_max * (1.0 + 1e-12),
        }
    }

    /// Largest `r` with both `P ± r ê` inside the domain.
    fn radial_extent(&self, p: &Wavevector, e: &Wavevector) -> f64 {
        let a = self.k_max;
        match self.domain {
            DomainShape::Disk => {
                let pe = p.dot(e);
                let disc = (pe * pe - p.dot(p) + a * a).max(0.0).sqrt();
                (disc - pe.abs()).max(0.0)
            }
            DomainShape::Square => {
                let mut r = f64::INFINITY;
                for (pc, ec) in [(p.x, e.x), (p.y, e.y)] {
                    if ec.abs() > 1e-300 {
                        r = r.min((a - pc.abs()) / ec.abs());
                    }
                }
                r.max(0.0)
            }
        }
    }

    /// Outer nodes `(k₁, weight)` covering the domain.
    fn outer_nodes(&self) -> Vec<(Wavevector, f64)> {
        let n = self.nodes;
        match self.domain {
            DomainShape::Disk => {
                let (rho, wr) = gauss_legendre_on(n, 0.0, self.k_max);
                let (phi, wp) = gauss_legendre_on(n, 0.0, 2.0 * PI);
                let mut out = Vec::with_capacity(n * n);
                for (r, w1) in rho.iter().zip(&wr) {
                    for (p, w2) in phi.iter().zip(&wp) {
                        out.push((Wavevector::new(r * p.cos(), r * p.sin()), w1 * w2 * r));
                    }
                }
                out
            }
            DomainShape::Square => {
                let (x, w) = gauss_legendre_on(n, -self.k_max, self.k_max);
                let mut out = Vec::with_capacity(n * n);
                for (xi, wi) in x.iter().zip(&w) {
                    for (yj, wj) in x.iter().zip(&w) {
                        out.push((Wavevector::new(*xi, *yj), wi * wj));
                    }
                }
                out
            }
        }
    }
}

/// Continuum rates at one wavevector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuumRates {
    pub eta: f64,
    pub gamma: f64,
    /// Roots whose Jacobian fell below the tangency threshold and were regularized.
    pub near_singular_roots: usize,
}

struct Mismatch<'a> {
    model: &'a WaveModel,
    /// Constant part `s_k ω_k + s₁ ω₁`.
    base: f64,
    /// Signs of `ω(k₂)` and `ω(k₃)`.
    s2: f64,
    s3: f64,
    p: Wavevector,
    e: Wavevector,
}

impl Mismatch<'_> {
    fn value(&self, r: f64) -> f64 {
        let d = &self.model.dispersion;
        self.base + self.s2 * d.omega((self.p + self.e.scale(r)).norm()) + self.s3 * d.omega((self.p - self.e.scale(r)).norm())
    }

    fn derivative(&self, r: f64) -> f64 {
        let d = &self.model.dispersion;
        let k2 = self.p + self.e.scale(r);
        let k3 = self.p - self.e.scale(r);
        let term = |k: &Wavevector, sign: f64| {
            let m = k.norm();
            if m == 0.0 {
                0.0
            } else {
                sign * d.group_speed(m) * k.dot(&self.e) / m
            }
        };
        self.s2 * term(&k2, 1.0) + self.s3 * term(&k3, -1.0)
    }
}

/// Roots of `f` on `[0, r_max]` found by a uniform scan and bisection.
fn radial_roots(f: &Mismatch, r_max: f64, samples: usize, tol: f64) -> Vec<f64> {
    let mut roots = Vec::new();
    if r_max <= 0.0 {
        return roots;
    }
    let h = r_max / samples as f64;
    let mut a = 0.0;
    let mut fa = f.value(a);
    for i in 1..=samples {
        let b = i as f64 * h;
        let fb = f.value(b);
        if fa == 0.0 {
            if a > 0.0 {
                roots.push(a);
            }
        } else if fa * fb < 0.0 {
            let (mut lo, mut hi, mut flo) = (a, b, fa);
            while hi - lo > tol * r_max {
                let mid = 0.5 * (lo + hi);
                let fm = f.value(mid);
                if fm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if flo * fm < 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    flo = fm;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        a = b;
        fa = fb;
    }
    if fa == 0.0 {
        roots.push(a);
    }
    roots
}

/// Roots of the mismatch along one ray with their weights `r / |∂ω̃/∂r|`,
/// and the number of regularized tangential roots.
fn resolve_ray(f: &Mismatch, r_max: f64, quad: &QuadratureSpec, tangency: f64) -> (Vec<(f64, f64)>, usize) {
    let mut near = 0;
    let roots = radial_roots(f, r_max, quad.radial_samples, quad.root_tol)
        .into_iter()
        .map(|r| {
            let mut d = f.derivative(r).abs();
            if d < tangency {
                // local quadratic expansion: |ω̃| ≈ |c|(r − r₀)²/2 resolved at the tangency scale
                let h = 1e-6 * r_max;
                let c = (f.derivative(r + h) - f.derivative((r - h).max(0.0))) / (2.0 * h);
                d = (2.0 * c.abs() * tangency).sqrt().max(tangency);
                near += 1;
            }
            (r, r / d)
        })
        .collect();
    (roots, near)
}

fn check_model(model: &WaveModel) -> Result<()> {
    if model.grid.dim() != 2 {
        return Err(Error::Unsupported("continuum quadrature is implemented for 2D isotropic spectra only".into()));
    }
    Ok(())
}

/// `η_k` and `γ_k` at one wavevector for the isotropic spectrum `n(|k|)`.
pub fn rates_continuum_at<F>(
    model: &WaveModel,
    k: &Wavevector,
    n: &F,
    quad: &QuadratureSpec,
    convention: GammaConvention,
) -> Result<ContinuumRates>
where
    F: Fn(f64) -> f64 + Sync,
{
    check_model(model)?;
    quad.validate()?;
    if !quad.contains(k) {
        return Err(Error::Domain(format!("wavevector ({}, {}) lies outside the integration domain", k.x, k.y)));
    }
    let disp = &model.dispersion;
    let inter = &model.interaction;
    let tangency = 1e-8 * disp.omega(quad.k_max);
    let (theta, wt) = gauss_legendre_on(quad.nodes, 0.0, 2.0 * PI);
    let directions: Vec<(Wavevector, f64)> = theta.iter().zip(&wt).map(|(t, w)| (Wavevector::new(t.cos(), t.sin()), *w)).collect();
    let kn = k.norm();
    let wk = disp.omega(kn);
    // (sign of ω₁, sign of ω₂, sign of ω₃) in the resonance condition
    let equilibrium_signs = (1.0, -1.0, -1.0);
    let literal_signs = (-1.0, -1.0, 1.0);

    let parts: Vec<ContinuumRates> = quad
        .outer_nodes()
        .par_iter()
        .map(|(k1, w1)| {
            let mut acc = ContinuumRates { eta: 0.0, gamma: 0.0, near_singular_roots: 0 };
            let k1n = k1.norm();
            let n1 = n(k1n);
            let p = (*k + *k1).scale(0.5);
            for (e, we) in &directions {
                let r_max = quad.radial_extent(&p, e);
                let ray =
                    |signs: (f64, f64, f64)| Mismatch { model, base: wk + signs.0 * disp.omega(k1n), s2: signs.1, s3: signs.2, p, e: *e };
                let partners = |r: f64| {
                    let (k2, k3) = ((p + e.scale(r)).norm(), (p - e.scale(r)).norm());
                    let w = inter.coupling_from_norms(kn, k1n, k2, k3);
                    (w * w, n(k2), n(k3))
                };
                let (roots, near) = resolve_ray(&ray(equilibrium_signs), r_max, quad, tangency);
                acc.near_singular_roots += near;
                for (r, jac) in roots {
                    let (w2, n2, n3) = partners(r);
                    let base = w1 * we * jac * w2;
                    acc.eta += base * n1 * n2 * n3;
                    if convention == GammaConvention::EquilibriumConsistent {
                        acc.gamma += base * (n1 * n2 + n1 * n3 - n2 * n3);
                    }
                }
                if convention == GammaConvention::Literal {
                    let (roots, near) = resolve_ray(&ray(literal_signs), r_max, quad, tangency);
                    acc.near_singular_roots += near;
                    for (r, jac) in roots {
                        let (w2, n2, n3) = partners(r);
                        acc.gamma += w1 * we * jac * w2 * (n1 * (n2 + n3) - n2 * n3);
                    }
                }
            }
            acc
        })
        .collect();

    let e2 = model.epsilon * model.epsilon;
    let gamma_pref = match convention {
        GammaConvention::EquilibriumConsistent => 4.0 * PI * e2,
        GammaConvention::Literal => 8.0 * PI * e2,
    };
    let mut out = ContinuumRates { eta: 0.0, gamma: 0.0, near_singular_roots: 0 };
    for a in &parts {
        out.eta += a.eta;
        out.gamma += a.gamma;
        out.near_singular_roots += a.near_singular_roots;
    }
    out.eta *= 4.0 * PI * e2;
    out.gamma *= gamma_pref;
    if out.near_singular_roots > 0 {
        log::warn!("{} near-singular resonance roots regularized at |k| = {kn:.6e}", out.near_singular_roots);
    }
    Ok(out)
}

pub fn eta_continuum<F>(model: &WaveModel, k: &Wavevector, n: &F, quad: &QuadratureSpec) -> Result<f64>
where
    F: Fn(f64) -> f64 + Sync,
{
    Ok(rates_continuum_at(model, k, n, quad, GammaConvention::EquilibriumConsistent)?.eta)
}

pub fn gamma_continuum<F>(model: &WaveModel, k: &Wavevector, n: &F, quad: &QuadratureSpec, convention: GammaConvention) -> Result<f64>
where
    F: Fn(f64) -> f64 + Sync,
{
    Ok(rates_continuum_at(model, k, n, quad, convention)?.gamma)
}

/// Continuum rates at a list of wavevectors.
pub fn rates_continuum<F>(
    model: &WaveModel,
    ks: &[Wavevector],
    n: &F,
    quad: &QuadratureSpec,
    convention: GammaConvention,
) -> Result<CollisionRates>
where
    F: Fn(f64) -> f64 + Sync,
{
    let mut eta = Vec::with_capacity(ks.len());
    let mut gamma = Vec::with_capacity(ks.len());
    let mut near = 0;
    for k in ks {
        let r = rates_continuum_at(model, k, n, quad, convention)?;
        eta.push(r.eta);
        gamma.push(r.gamma);
        near += r.near_singular_roots;
    }
    Ok(CollisionRates {
        eta,
        gamma,
        provenance: RateProvenance::Continuum { nodes: quad.nodes, root_tol: quad.root_tol, k_max: quad.k_max, near_singular_roots: near },
        convention,
    })
}
