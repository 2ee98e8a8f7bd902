//! The quartic Hamiltonian system `i ċ_l = ω_l c_l + ε N_l(c)` with
//! `N_l = Σ W(l,α;μ,ν) c̄_α c_μ c_ν` over `l + α = μ + ν`.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::wave_model::{InteractionModel, WaveModel};

/// Quadruple cap per right-hand-side evaluation.
pub const MAX_QUADRUPLES: usize = 1_000_000_000;

/// Which momentum-conserving quadruples enter the dynamics.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InteractionSet {
    #[default]
    Full,
    /// Only quadruples with `|ω_l + ω_α − ω_μ − ω_ν| ≤ 1e-9 · max ω`.
    ResonantOnly,
}

#[derive(Debug, Clone, Copy)]
struct Quad {
    alpha: u32,
    mu: u32,
    nu: u32,
    w: f64,
}

#[derive(Debug, Clone)]
enum Kernel {
    /// `W = scale · g_l g_α g_μ g_ν`; pair sums over `μ + ν` make each
    /// evaluation quadratic in the mode count.
    Separable { scale: f64, g: Vec<f64>, pair_slot: Vec<u32>, slots: usize },
    /// Explicit quadruple list in CSR layout by `l`.
    Table { offsets: Vec<usize>, quads: Vec<Quad> },
}

/// Frequencies, couplings and `ε` of one model, ready for evaluation.
#[derive(Debug, Clone)]
pub struct QuarticSystem {
    pub omega: Vec<f64>,
    pub epsilon: f64,
    pub set: InteractionSet,
    /// `W(l,α;l,α)` per pair, row-major.
    diagonal: Vec<f64>,
    kernel: Kernel,
}

impl QuarticSystem {
    pub fn new(model: &WaveModel, set: InteractionSet) -> Result<Self> {
        let grid = &model.grid;
        let n = grid.len();
        let count = n.checked_pow(3).unwrap_or(usize::MAX);
        if count > MAX_QUADRUPLES {
            return Err(Error::Guard(format!("{count} quadruples per evaluation exceed {MAX_QUADRUPLES}; use a smaller grid")));
        }
        let omega = model.frequencies();
        let norms: Vec<f64> = (0..n).map(|i| grid.wavevector(i).norm()).collect();
        let mut diagonal = vec![0.0; n * n];
        for l in 0..n {
            for a in 0..n {
                diagonal[l * n + a] = model.interaction.coupling_from_norms(norms[l], norms[a], norms[l], norms[a]);
            }
        }
        if diagonal.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidModel("interaction coefficient is not finite on this grid".into()));
        }
        let kernel = match (set, model.interaction) {
            (InteractionSet::Full, interaction) => {
                let (scale, g) = match interaction {
                    InteractionModel::Constant { w0 } => (w0, vec![1.0; n]),
                    InteractionModel::ProductPower { prefactor, beta } => (prefactor, norms.iter().map(|k| k.powf(0.25 * beta)).collect()),
                };
                let h = grid.half_width();
                let side = (4 * h + 1) as usize;
                let slots = if grid.dim() == 2 { side * side } else { side };
                let mut pair_slot = vec![0u32; n * n];
                for m in 0..n {
                    for v in 0..n {
                        let (a, b) = (grid.lattice_index(m), grid.lattice_index(v));
                        let ix = (a[0] + b[0] + 2 * h) as usize;
                        let iy = (a[1] + b[1] + 2 * h) as usize;
                        pair_slot[m * n + v] = if grid.dim() == 2 { ix * side + iy } else { ix } as u32;
                    }
                }
                Kernel::Separable { scale, g, pair_slot, slots }
            }
            (InteractionSet::ResonantOnly, _) => {
                let tol = 1e-9 * omega.iter().cloned().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
                let mut offsets = Vec::with_capacity(n + 1);
                let mut quads = Vec::new();
                offsets.push(0);
                for l in 0..n {
                    for a in 0..n {
                        for m in 0..n {
                            let Some(v) = grid.partner(l, a, m) else { continue };
                            if (omega[l] + omega[a] - omega[m] - omega[v]).abs() > tol {
                                continue;
                            }
                            let w = model.interaction.coupling_from_norms(norms[l], norms[a], norms[m], norms[v]);
                            quads.push(Quad { alpha: a as u32, mu: m as u32, nu: v as u32, w });
                        }
                    }
                    offsets.push(quads.len());
                }
                Kernel::Table { offsets, quads }
            }
        };
        Ok(Self { omega, epsilon: model.epsilon, set, diagonal, kernel })
    }

    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Self {
        Self { epsilon, ..self.clone() }
    }

    /// `N_l(c)` for every mode, written into `out`; `scratch` holds pair sums.
    pub fn nonlinear_into(&self, c: &[C64], out: &mut [C64], scratch: &mut Vec<C64>) {
        let n = c.len();
        match &self.kernel {
            Kernel::Separable { scale, g, pair_slot, slots } => {
                scratch.clear();
                scratch.resize(*slots + n, C64::new(0.0, 0.0));
                let (pairs, gc) = scratch.split_at_mut(*slots);
                for i in 0..n {
                    gc[i] = c[i] * g[i];
                }
                for m in 0..n {
                    let row = &pair_slot[m * n..(m + 1) * n];
                    for v in 0..n {
                        pairs[row[v] as usize] += gc[m] * gc[v];
                    }
                }
                for l in 0..n {
                    let row = &pair_slot[l * n..(l + 1) * n];
                    let mut acc = C64::new(0.0, 0.0);
                    for a in 0..n {
                        acc += gc[a].conj() * pairs[row[a] as usize];
                    }
                    out[l] = acc * (scale * g[l]);
                }
            }
            Kernel::Table { offsets, quads } => {
                for l in 0..n {
                    let mut acc = C64::new(0.0, 0.0);
                    for q in &quads[offsets[l]..offsets[l + 1]] {
                        acc += c[q.alpha as usize].conj() * c[q.mu as usize] * c[q.nu as usize] * q.w;
                    }
                    out[l] = acc;
                }
            }
        }
    }

    /// `ċ = −i(ω c + ε N(c))`.
    pub fn rhs_into(&self, c: &[C64], out: &mut [C64], scratch: &mut Vec<C64>) {
        self.nonlinear_into(c, out, scratch);
        for l in 0..c.len() {
            let v = c[l] * self.omega[l] + out[l] * self.epsilon;
            out[l] = C64::new(v.im, -v.re);
        }
    }

    /// Total wave action `Σ|c|²`.
    pub fn action(&self, c: &[C64]) -> f64 {
        crate::stats::compensated_sum(c.iter().map(|z| z.norm_sqr()))
    }

    /// `H = Σ ω|c|² + (ε/2) Σ W c̄_l c̄_α c_μ c_ν`.
    pub fn hamiltonian(&self, c: &[C64]) -> f64 {
        let mut nl = vec![C64::new(0.0, 0.0); c.len()];
        let mut scratch = Vec::new();
        self.nonlinear_into(c, &mut nl, &mut scratch);
        let quad = crate::stats::compensated_sum(c.iter().zip(&self.omega).map(|(z, w)| w * z.norm_sqr()));
        let quartic = crate::stats::compensated_sum(c.iter().zip(&nl).map(|(z, v)| (z.conj() * v).re));
        quad + 0.5 * self.epsilon * quartic
    }

    /// `Ω_k = 2ε Σ_α W(k,α;k,α) |b_α|²`.
    pub fn frequency_shift(&self, b: &[C64]) -> Vec<f64> {
        let n = b.len();
        (0..n)
            .map(|k| {
                let sum = crate::stats::compensated_sum((0..n).map(|a| self.diagonal[k * n + a] * b[a].norm_sqr()));
                2.0 * self.epsilon * sum
            })
            .collect()
    }

    /// Largest `|W(l,α;l,α)|`, the scale of the nonlinear frequency.
    pub fn max_diagonal_coupling(&self) -> f64 {
        self.diagonal.iter().fold(0.0, |m, w| m.max(w.abs()))
    }

    pub fn max_frequency(&self) -> f64 {
        self.omega.iter().cloned().fold(0.0, f64::max)
    }
}
