//! Dispersion laws, interaction coefficients, spectral lattices and the
//! dimensional estimates that go with them (wave-breaking intensity, cascade
//! breakdown wavenumbers).
//!
//! Wavevectors live on the integer lattice of a periodic box of side `L`,
//! scaled by `2π/L`. One-dimensional grids store the second component as 0.

use std::f64::consts::PI;
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A wavevector in one or two dimensions (`y = 0` in 1D).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Wavevector {
    pub x: f64,
    pub y: f64,
}

impl Wavevector {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub const fn along_x(k: f64) -> Self {
        Self { x: k, y: 0.0 }
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn scale(&self, a: f64) -> Self {
        Self::new(a * self.x, a * self.y)
    }
}

impl Add for Wavevector {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Wavevector {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Neg for Wavevector {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

/// Rectangular integer lattice `m ∈ [-M, M]^d` with `M = ⌊n/2⌋`, scaled by
/// `2π/L`.
///
/// The lattice always contains the zero mode and is closed under negation,
/// so an even `n` yields `n + 1` modes per dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralGrid {
    dim: usize,
    n: usize,
    length: f64,
    half_width: i32,
    lattice: Vec<[i32; 2]>,
    lookup: Vec<Option<u32>>,
}

impl SpectralGrid {
    pub fn new(dim: usize, n: usize, length: f64) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidModel(format!("grid dimension must be 1 or 2, got {dim}")));
        }
        if n < 2 {
            return Err(Error::InvalidModel(format!("grid needs n >= 2, got {n}")));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidModel(format!("box length must be positive, got {length}")));
        }
        let half_width = (n / 2) as i32;
        let side = (2 * half_width + 1) as usize;
        let y_range = if dim == 2 { -half_width..=half_width } else { 0..=0 };
        let mut lattice = Vec::with_capacity(side.pow(dim as u32));
        for mx in -half_width..=half_width {
            for my in y_range.clone() {
                lattice.push([mx, my]);
            }
        }
        let mut lookup = vec![None; side * if dim == 2 { side } else { 1 }];
        for (i, m) in lattice.iter().enumerate() {
            let slot = Self::slot(half_width, dim, *m).expect("lattice point inside the box");
            lookup[slot] = Some(i as u32);
        }
        Ok(Self { dim, n, length, half_width, lattice, lookup })
    }

    fn slot(half_width: i32, dim: usize, m: [i32; 2]) -> Option<usize> {
        let side = 2 * half_width + 1;
        let ix = m[0] + half_width;
        if ix < 0 || ix >= side {
            return None;
        }
        if dim == 1 {
            return (m[1] == 0).then_some(ix as usize);
        }
        let iy = m[1] + half_width;
        if iy < 0 || iy >= side {
            return None;
        }
        Some((ix * side + iy) as usize)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Resolution parameter as configured.
    pub fn resolution(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Largest lattice index per dimension.
    pub fn half_width(&self) -> i32 {
        self.half_width
    }

    pub fn len(&self) -> usize {
        self.lattice.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lattice.is_empty()
    }

    /// Lattice spacing `2π/L`.
    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.length
    }

    /// Box volume `L^d`.
    pub fn volume(&self) -> f64 {
        self.length.powi(self.dim as i32)
    }

    pub fn lattice_index(&self, mode: usize) -> [i32; 2] {
        self.lattice[mode]
    }

    pub fn index_of(&self, m: [i32; 2]) -> Option<usize> {
        Self::slot(self.half_width, self.dim, m).and_then(|s| self.lookup[s].map(|i| i as usize))
    }

    pub fn wavevector(&self, mode: usize) -> Wavevector {
        let [mx, my] = self.lattice[mode];
        let dk = self.spacing();
        Wavevector::new(dk * mx as f64, dk * my as f64)
    }

    pub fn wavevectors(&self) -> Vec<Wavevector> {
        (0..self.len()).map(|i| self.wavevector(i)).collect()
    }

    pub fn negated(&self, mode: usize) -> usize {
        let [mx, my] = self.lattice[mode];
        self.index_of([-mx, -my]).expect("grid is closed under negation")
    }

    /// Index of `ν` with `l + α = μ + ν`, if it lies on the grid.
    #[inline]
    pub fn partner(&self, l: usize, alpha: usize, mu: usize) -> Option<usize> {
        let a = self.lattice[l];
        let b = self.lattice[alpha];
        let c = self.lattice[mu];
        self.index_of([a[0] + b[0] - c[0], a[1] + b[1] - c[1]])
    }
}

/// Linear dispersion law `ω(k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DispersionLaw {
    /// `ω = c |k|^α`.
    PowerLaw { c: f64, alpha: f64 },
    /// `ω = √(g |k|)`.
    DeepWaterGravity { g: f64 },
}

impl DispersionLaw {
    pub fn power_law(c: f64, alpha: f64) -> Result<Self> {
        let law = Self::PowerLaw { c, alpha };
        law.validate()?;
        Ok(law)
    }

    pub fn deep_water(g: f64) -> Result<Self> {
        let law = Self::DeepWaterGravity { g };
        law.validate()?;
        Ok(law)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::PowerLaw { c, alpha } => {
                if !(c > 0.0 && c.is_finite()) {
                    return Err(Error::InvalidModel(format!("dispersion prefactor must be positive, got {c}")));
                }
                if !(alpha > 0.0 && alpha.is_finite()) {
                    return Err(Error::InvalidModel(format!("dispersion exponent must be positive, got {alpha}")));
                }
            }
            Self::DeepWaterGravity { g } => {
                if !(g > 0.0 && g.is_finite()) {
                    return Err(Error::InvalidModel(format!("gravity must be positive, got {g}")));
                }
            }
        }
        Ok(())
    }

    /// `ω` as a function of `|k|`.
    #[inline]
    pub fn omega(&self, k: f64) -> f64 {
        let k = k.abs();
        match *self {
            Self::PowerLaw { c, alpha } => {
                if k == 0.0 {
                    0.0
                } else {
                    c * k.powf(alpha)
                }
            }
            Self::DeepWaterGravity { g } => (g * k).sqrt(),
        }
    }

    /// `dω/d|k|`.
    #[inline]
    pub fn group_speed(&self, k: f64) -> f64 {
        let k = k.abs();
        match *self {
            Self::PowerLaw { c, alpha } => {
                if k == 0.0 {
                    if alpha > 1.0 {
                        0.0
                    } else if alpha == 1.0 {
                        c
                    } else {
                        f64::INFINITY
                    }
                } else {
                    c * alpha * k.powf(alpha - 1.0)
                }
            }
            Self::DeepWaterGravity { g } => {
                if k == 0.0 {
                    f64::INFINITY
                } else {
                    0.5 * (g / k).sqrt()
                }
            }
        }
    }

    /// `d²ω/d|k|²`.
    pub fn curvature(&self, k: f64) -> f64 {
        let k = k.abs();
        match *self {
            Self::PowerLaw { c, alpha } => c * alpha * (alpha - 1.0) * k.powf(alpha - 2.0),
            Self::DeepWaterGravity { g } => -0.25 * g.sqrt() * k.powf(-1.5),
        }
    }

    pub fn dispersion(&self, k: &Wavevector) -> f64 {
        self.omega(k.norm())
    }
}

/// Real four-wave interaction coefficient `W(k, k₁; k₂, k₃)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InteractionModel {
    Constant {
        w0: f64,
    },
    /// `prefactor · (|k||k₁||k₂||k₃|)^{β/4}`.
    ProductPower {
        #[serde(default = "one")]
        prefactor: f64,
        beta: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl InteractionModel {
    pub fn constant(w0: f64) -> Self {
        Self::Constant { w0 }
    }

    pub fn product_power(prefactor: f64, beta: f64) -> Self {
        Self::ProductPower { prefactor, beta }
    }

    #[inline]
    pub fn coupling_from_norms(&self, k: f64, k1: f64, k2: f64, k3: f64) -> f64 {
        match *self {
            Self::Constant { w0 } => w0,
            Self::ProductPower { prefactor, beta } => prefactor * ((k.abs() * k1.abs()) * (k2.abs() * k3.abs())).powf(0.25 * beta),
        }
    }

    pub fn interaction(&self, k: &Wavevector, k1: &Wavevector, k2: &Wavevector, k3: &Wavevector) -> f64 {
        self.coupling_from_norms(k.norm(), k1.norm(), k2.norm(), k3.norm())
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Self::Constant { .. })
    }
}

/// Everything needed to write down the four-wave dynamics on a lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveModel {
    pub dispersion: DispersionLaw,
    pub interaction: InteractionModel,
    pub epsilon: f64,
    pub grid: SpectralGrid,
}

impl WaveModel {
    pub fn new(dispersion: DispersionLaw, interaction: InteractionModel, epsilon: f64, grid: SpectralGrid) -> Result<Self> {
        dispersion.validate()?;
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidModel(format!("epsilon must be non-negative, got {epsilon}")));
        }
        Ok(Self { dispersion, interaction, epsilon, grid })
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Self {
        Self { epsilon, ..self.clone() }
    }

    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.grid.len()).map(|i| self.dispersion.dispersion(&self.grid.wavevector(i))).collect()
    }

    /// Arithmetic mean of `ω` over the grid, the frequency scale used to
    /// express nonlinear times `1/(ε² ω̄)`.
    pub fn mean_frequency(&self) -> f64 {
        let w = self.frequencies();
        w.iter().sum::<f64>() / w.len() as f64
    }

    /// Coupling for a lattice quadruple `(l, α; μ, ν)`.
    #[inline]
    pub fn coupling(&self, l: usize, alpha: usize, mu: usize, nu: usize) -> f64 {
        let g = &self.grid;
        self.interaction.interaction(&g.wavevector(l), &g.wavevector(alpha), &g.wavevector(mu), &g.wavevector(nu))
    }
}

/// Wave-breaking estimate `s_nl = ω / (ε W |k|²)`.
///
/// This is a dimensional estimate: it assumes that a mode at the critical
/// intensity is correlated over a k-range of width `|k|`. Units follow
/// whatever units the caller uses for `W`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffModel {
    pub dispersion: DispersionLaw,
    pub epsilon: f64,
    pub coupling: f64,
}

impl CutoffModel {
    pub fn new(dispersion: DispersionLaw, epsilon: f64, coupling: f64) -> Result<Self> {
        dispersion.validate()?;
        if !(epsilon > 0.0) {
            return Err(Error::InvalidModel(format!("cutoff needs epsilon > 0, got {epsilon}")));
        }
        if coupling == 0.0 || !coupling.is_finite() {
            return Err(Error::InvalidModel("cutoff needs a nonzero finite coupling".into()));
        }
        Ok(Self { dispersion, epsilon, coupling })
    }

    pub fn critical_amplitude(&self, k: &Wavevector) -> Result<f64> {
        let kn = k.norm();
        if kn == 0.0 {
            return Err(Error::UndefinedCutoff);
        }
        Ok(self.dispersion.omega(kn) / (self.epsilon * self.coupling.abs() * kn * kn))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CascadeDirection {
    /// Energy cascade toward high wavenumbers, set by the energy flux.
    Direct,
    /// Wave-action cascade toward low wavenumbers, set by the action flux.
    Inverse,
}

/// Dimensional analysis of deep-water gravity-wave cascades.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CascadeScaling {
    pub g: f64,
    pub energy_flux: f64,
    pub action_flux: f64,
    pub direction: CascadeDirection,
}

impl CascadeScaling {
    pub fn new(g: f64, energy_flux: f64, action_flux: f64, direction: CascadeDirection) -> Result<Self> {
        if !(g > 0.0) {
            return Err(Error::InvalidModel(format!("gravity must be positive, got {g}")));
        }
        if energy_flux < 0.0 || action_flux < 0.0 {
            return Err(Error::InvalidModel("cascade fluxes must be non-negative".into()));
        }
        Ok(Self { g, energy_flux, action_flux, direction })
    }

    /// `g³/P²` for the direct cascade, `g/Q` for the inverse one.
    pub fn breakdown_wavenumber(&self) -> Result<f64> {
        match self.direction {
            CascadeDirection::Direct => {
                if self.energy_flux == 0.0 {
                    return Err(Error::InfiniteBreakdown);
                }
                Ok(self.g.powi(3) / (self.energy_flux * self.energy_flux))
            }
            CascadeDirection::Inverse => {
                if self.action_flux == 0.0 {
                    return Err(Error::InfiniteBreakdown);
                }
                Ok(self.g / self.action_flux)
            }
        }
    }

    /// Dimensionless tail-strength parameter: `P^{2/3} k^{1/3} / g` (direct)
    /// or `Q k / g` (inverse). Equals 1 at the breakdown wavenumber.
    pub fn tail_area_parameter(&self, k: f64) -> f64 {
        match self.direction {
            CascadeDirection::Direct => self.energy_flux.powf(2.0 / 3.0) * k.cbrt() / self.g,
            CascadeDirection::Inverse => self.action_flux * k / self.g,
        }
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    #[test]
    fn dispersion_examples() {
        let deep = DispersionLaw::deep_water(9.81).unwrap();
        assert!((deep.omega(1.0) - 9.81f64.sqrt()).abs() < 1e-15);
        assert!((deep.omega(1.0) - 3.132_091_952_673_165_5).abs() < 1e-12);
        let pl = DispersionLaw::power_law(1.0, 2.0).unwrap();
        assert_eq!(pl.omega(3.0), 9.0);
        assert_eq!(pl.omega(0.0), 0.0);
        assert_eq!(deep.omega(0.0), 0.0);
        assert_eq!(pl.dispersion(&Wavevector::new(0.0, -3.0)), 9.0);
    }

    #[test]
    fn negative_parameters_rejected() {
        assert!(DispersionLaw::deep_water(-1.0).is_err());
        assert!(DispersionLaw::power_law(-1.0, 2.0).is_err());
        assert!(DispersionLaw::power_law(1.0, 0.0).is_err());
    }

    #[test]
    fn dispersion_is_even_on_grid() {
        let grid = SpectralGrid::new(2, 8, 7.0).unwrap();
        for law in [DispersionLaw::deep_water(9.81).unwrap(), DispersionLaw::power_law(1.3, 1.5).unwrap()] {
            for i in 0..grid.len() {
                let j = grid.negated(i);
                assert_eq!(law.dispersion(&grid.wavevector(i)), law.dispersion(&grid.wavevector(j)));
            }
        }
    }

    #[test]
    fn interaction_examples() {
        let k = Wavevector::along_x(2.0);
        let c = InteractionModel::constant(1.0);
        assert_eq!(c.interaction(&k, &k, &-k, &k), 1.0);
        let p = InteractionModel::product_power(1.0, 4.0);
        assert!((p.interaction(&k, &-k, &Wavevector::new(0.0, 2.0), &k) - 16.0).abs() < 1e-12);
    }

    #[test]
    fn grid_is_symmetric_and_distinct() {
        for (d, n) in [(1, 8), (1, 7), (2, 4), (2, 5)] {
            let g = SpectralGrid::new(d, n, 2.0 * PI).unwrap();
            let side = 2 * (n / 2) + 1;
            assert_eq!(g.len(), side.pow(d as u32));
            let mut seen = std::collections::HashSet::new();
            for i in 0..g.len() {
                assert!(seen.insert(g.lattice_index(i)));
                let j = g.negated(i);
                let (a, b) = (g.lattice_index(i), g.lattice_index(j));
                assert_eq!([a[0] + b[0], a[1] + b[1]], [0, 0]);
            }
            assert!(g.index_of([0, 0]).is_some());
        }
        assert!(SpectralGrid::new(3, 8, 1.0).is_err());
        assert!(SpectralGrid::new(1, 1, 1.0).is_err());
    }

    #[test]
    fn partner_resolves_momentum() {
        let g = SpectralGrid::new(1, 8, 2.0 * PI).unwrap();
        let l = g.index_of([3, 0]).unwrap();
        let a = g.index_of([-1, 0]).unwrap();
        let m = g.index_of([4, 0]).unwrap();
        assert_eq!(g.lattice_index(g.partner(l, a, m).unwrap()), [-2, 0]);
        let m = g.index_of([-4, 0]).unwrap();
        assert_eq!(g.partner(l, a, m), None);
    }

    #[test]
    fn critical_amplitude_examples() {
        let pl = DispersionLaw::power_law(0.25, 2.0).unwrap();
        // ω(2) = 1
        let cut = CutoffModel::new(pl, 0.1, 1.0).unwrap();
        assert!((cut.critical_amplitude(&Wavevector::along_x(2.0)).unwrap() - 2.5).abs() < 1e-12);
        let half = CutoffModel::new(pl, 0.05, 1.0).unwrap();
        assert!((half.critical_amplitude(&Wavevector::along_x(2.0)).unwrap() - 5.0).abs() < 1e-12);
        let deep = CutoffModel::new(DispersionLaw::deep_water(9.81).unwrap(), 0.1, 1.0).unwrap();
        let s = deep.critical_amplitude(&Wavevector::along_x(1.0)).unwrap();
        assert!((s - 9.81f64.sqrt() / 0.1).abs() < 1e-12);
        assert!((s - 31.320_919_526_731_65).abs() < 1e-10);
        assert_eq!(deep.critical_amplitude(&Wavevector::default()), Err(Error::UndefinedCutoff));
    }

    #[test]
    fn critical_amplitude_scales_inverse_epsilon() {
        let law = DispersionLaw::deep_water(9.81).unwrap();
        for &eps in &[0.01, 0.1, 0.37] {
            for &k in &[0.5, 1.0, 3.0] {
                let kv = Wavevector::along_x(k);
                let a = CutoffModel::new(law, eps, 1.0).unwrap().critical_amplitude(&kv).unwrap();
                let b = CutoffModel::new(law, 2.0 * eps, 1.0).unwrap().critical_amplitude(&kv).unwrap();
                assert_eq!(b, a / 2.0);
            }
        }
    }

    #[test]
    fn breakdown_examples() {
        let d = CascadeScaling::new(9.81, 1.0, 2.0, CascadeDirection::Direct).unwrap();
        assert!((d.breakdown_wavenumber().unwrap() - 944.076_141).abs() < 1e-6);
        let i = CascadeScaling { direction: CascadeDirection::Inverse, ..d };
        assert!((i.breakdown_wavenumber().unwrap() - 4.905).abs() < 1e-12);
        let d2 = CascadeScaling { energy_flux: 2.0, ..d };
        assert!((d2.breakdown_wavenumber().unwrap() - d.breakdown_wavenumber().unwrap() / 4.0).abs() < 1e-9);
        let zero = CascadeScaling { energy_flux: 0.0, ..d };
        assert_eq!(zero.breakdown_wavenumber(), Err(Error::InfiniteBreakdown));
    }

    #[test]
    fn tail_area_is_one_at_breakdown() {
        for dir in [CascadeDirection::Direct, CascadeDirection::Inverse] {
            for &(g, p, q) in &[(9.81, 1.0, 1.0), (1.0, 0.3, 7.0), (3.2, 11.0, 0.01)] {
                let sc = CascadeScaling::new(g, p, q, dir).unwrap();
                let knl = sc.breakdown_wavenumber().unwrap();
                assert!((sc.tail_area_parameter(knl) - 1.0).abs() < 1e-12);
            }
        }
        let inv = CascadeScaling::new(9.81, 1.0, 1.0, CascadeDirection::Inverse).unwrap();
        assert!((inv.tail_area_parameter(9.81) - 1.0).abs() < 1e-15);
        let dir = CascadeScaling::new(9.81, 1.0, 1.0, CascadeDirection::Direct).unwrap();
        assert!((dir.tail_area_parameter(1.0) - 1.0 / 9.81).abs() < 1e-15);
    }

    fn vector() -> impl Strategy<Value = Wavevector> {
        (-20.0f64..20.0, -20.0f64..20.0).prop_map(|(x, y)| Wavevector::new(x, y))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn interaction_symmetries_are_exact(
            k in vector(), k1 in vector(), k2 in vector(), k3 in vector(),
            prefactor in -3.0f64..3.0, beta in 0.0f64..4.0,
        ) {
            for w in [InteractionModel::product_power(prefactor, beta), InteractionModel::constant(prefactor)] {
                let v = w.interaction(&k, &k1, &k2, &k3);
                prop_assert_eq!(v, w.interaction(&k1, &k, &k2, &k3));
                prop_assert_eq!(v, w.interaction(&k, &k1, &k3, &k2));
                prop_assert_eq!(v, w.interaction(&k2, &k3, &k, &k1));
            }
        }
    }
}
