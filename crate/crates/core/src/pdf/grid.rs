use crate::error::{Error, Result};

/// Intensity density on a finite-volume grid over `[0, s_max]`.
///
/// Cell widths grow geometrically from `s₁` so that they sum to `s_max`. Densities
/// are nodal values at cell centres, and integrals use the midpoint rule.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudePdf {
    faces: Vec<f64>,
    centres: Vec<f64>,
    widths: Vec<f64>,
    pub density: Vec<f64>,
    cutoff: Option<f64>,
}

impl AmplitudePdf {
    /// Zero density on `cells` cells over `[0, s_max]` with first width `first_width`.
    pub fn geometric(cells: usize, first_width: f64, s_max: f64) -> Result<Self> {
        if cells < 3 {
            return Err(Error::Domain(format!("need at least 3 cells, got {cells}")));
        }
        if !(first_width > 0.0 && s_max > first_width && s_max.is_finite() && first_width.is_finite()) {
            return Err(Error::Domain(format!("need 0 < s₁ < s_max, got s₁ = {first_width}, s_max = {s_max}")));
        }
        let q = width_ratio(cells, first_width, s_max);
        let mut faces = Vec::with_capacity(cells + 1);
        faces.push(0.0);
        let mut w = first_width;
        for _ in 1..cells {
            faces.push(faces.last().unwrap() + w);
            w *= q;
        }
        faces.push(s_max);
        let centres = faces.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        let widths = faces.windows(2).map(|w| w[1] - w[0]).collect();
        Ok(Self { faces, centres, widths, density: vec![0.0; cells], cutoff: None })
    }

    /// Grid ending at the breaking cutoff `s_nl`; the density vanishes above it.
    pub fn with_cutoff(cells: usize, first_width: f64, s_nl: f64) -> Result<Self> {
        let mut pdf = Self::geometric(cells, first_width, s_nl)?;
        pdf.cutoff = Some(s_nl);
        Ok(pdf)
    }

    /// Nodal Rayleigh values, renormalized to unit mass on this grid.
    pub fn rayleigh(mut self, n: f64) -> Result<Self> {
        for (p, s) in self.density.iter_mut().zip(&self.centres) {
            *p = super::rayleigh_pdf(*s, n)?;
        }
        self.normalize()?;
        Ok(self)
    }

    pub fn from_fn(mut self, f: impl Fn(f64) -> f64) -> Result<Self> {
        for (p, s) in self.density.iter_mut().zip(&self.centres) {
            *p = f(*s);
        }
        if self.density.iter().any(|p| !(*p >= 0.0 && p.is_finite())) {
            return Err(Error::Domain("initial density must be finite and non-negative".into()));
        }
        Ok(self)
    }

    pub fn cells(&self) -> usize {
        self.centres.len()
    }

    pub fn faces(&self) -> &[f64] {
        &self.faces
    }

    pub fn centres(&self) -> &[f64] {
        &self.centres
    }

    pub fn widths(&self) -> &[f64] {
        &self.widths
    }

    pub fn s_max(&self) -> f64 {
        *self.faces.last().expect("grid has faces")
    }

    pub fn cutoff(&self) -> Option<f64> {
        self.cutoff
    }

    pub fn mass(&self) -> f64 {
        self.density.iter().zip(&self.widths).map(|(p, w)| p * w).sum()
    }

    /// `∫ sᵖ P ds`.
    pub fn moment(&self, p: u32) -> f64 {
        self.density.iter().zip(&self.widths).zip(&self.centres).map(|((d, w), s)| d * w * s.powi(p as i32)).sum()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let m = self.mass();
        if !(m > 0.0) {
            return Err(Error::Domain("cannot normalize a density with zero mass".into()));
        }
        self.density.iter_mut().for_each(|p| *p /= m);
        Ok(())
    }

    /// `Σ |P_i − f(s_i)| Δs_i`.
    pub fn l1_distance(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.l1_distance_below(f64::INFINITY, f)
    }

    /// L¹ distance restricted to cells whose centre lies below `s_limit`.
    pub fn l1_distance_below(&self, s_limit: f64, f: impl Fn(f64) -> f64) -> f64 {
        self.centres
            .iter()
            .zip(&self.widths)
            .zip(&self.density)
            .filter(|((s, _), _)| **s <= s_limit)
            .map(|((s, w), p)| (p - f(*s)).abs() * w)
            .sum()
    }

    /// Least-squares slope of `ln P` against `ln s` over cell centres in `[lo, hi]`.
    pub fn log_log_slope(&self, lo: f64, hi: f64) -> Result<f64> {
        let pts: Vec<(f64, f64)> = self
            .centres
            .iter()
            .zip(&self.density)
            .filter(|(s, p)| **s >= lo && **s <= hi && **p > 0.0)
            .map(|(s, p)| (s.ln(), p.ln()))
            .collect();
        if pts.len() < 3 {
            return Err(Error::InsufficientData(format!("only {} positive cells in [{lo}, {hi}]", pts.len())));
        }
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        Ok(sxy / sxx)
    }
}

/// Ratio `q` with `s₁ (qᴺ − 1)/(q − 1) = s_max`, by bisection in `ln q`.
fn width_ratio(cells: usize, first_width: f64, s_max: f64) -> f64 {
    let total = |q: f64| {
        if (q - 1.0).abs() < 1e-12 {
            first_width * cells as f64
        } else {
            first_width * (q.powi(cells as i32) - 1.0) / (q - 1.0)
        }
    };
    let (mut lo, mut hi) = (-10.0f64, 10.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if total(mid.exp()) < s_max {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (0.5 * (lo + hi)).exp()
}
