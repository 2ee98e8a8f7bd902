//! Experiment configuration in TOML.
//!
//! Every table rejects unknown keys. [`load_config`] fills defaults that
//! depend on the model (averaging time, quadrature extent), so emitting a
//! loaded config and loading it again yields the same value.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use wtlab_core::collision::{averaging_time_window, DomainShape, GammaConvention, Spectrum};
use wtlab_core::ensemble::{AmplitudeSpec, CapPolicy, InteractionSet, OmegaPolicy, Scheme};
use wtlab_core::pdf::CutoffClosure;
use wtlab_core::wave_model::{CascadeDirection, DispersionLaw, InteractionModel, SpectralGrid, WaveModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Rates,
    Kinetic,
    Moments,
    PdfSteady,
    PdfEvolve,
    Ensemble,
    CapExperiment,
    Scaling,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Rates => "rates",
            Self::Kinetic => "kinetic",
            Self::Moments => "moments",
            Self::PdfSteady => "pdf-steady",
            Self::PdfEvolve => "pdf-evolve",
            Self::Ensemble => "ensemble",
            Self::CapExperiment => "cap-experiment",
            Self::Scaling => "scaling",
        }
    }

    pub fn is_stochastic(self) -> bool {
        matches!(self, Self::Ensemble | Self::CapExperiment)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wave_model: Option<WaveModelSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub collision: Option<CollisionSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kinetic: Option<KineticSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pdf: Option<PdfSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<EnsembleSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cap: Option<CapSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scaling: Option<ScalingSection>,
}

fn two_pi() -> f64 {
    std::f64::consts::TAU
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub d: usize,
    pub n: usize,
    #[serde(default = "two_pi")]
    pub length: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveModelSection {
    pub epsilon: f64,
    pub dispersion: DispersionLaw,
    pub interaction: InteractionModel,
    pub grid: GridSection,
}

impl WaveModelSection {
    pub fn build(&self) -> Result<WaveModel> {
        let grid = SpectralGrid::new(self.grid.d, self.grid.n, self.grid.length).context("wave_model.grid")?;
        WaveModel::new(self.dispersion, self.interaction, self.epsilon, grid).context("wave_model")
    }
}

/// Initial or reference spectrum `n(k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpectrumSection {
    Constant {
        value: f64,
    },
    /// `amplitude / (1 + (|k|/width)²)`.
    Lorentzian {
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "one")]
        width: f64,
    },
}

impl Default for SpectrumSection {
    fn default() -> Self {
        Self::Lorentzian { amplitude: 1.0, width: 1.0 }
    }
}

impl SpectrumSection {
    pub fn value(&self, k: f64) -> f64 {
        match *self {
            Self::Constant { value } => value,
            Self::Lorentzian { amplitude, width } => amplitude / (1.0 + (k / width).powi(2)),
        }
    }

    pub fn build(&self, grid: &SpectralGrid) -> Result<Spectrum> {
        Spectrum::from_fn(grid, |k| self.value(k.norm())).context("spectrum")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateRoute {
    #[default]
    Discrete,
    Continuum,
}

fn default_nodes() -> usize {
    32
}

fn default_root_tol() -> f64 {
    1e-10
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSection {
    #[serde(default = "default_nodes")]
    pub nodes: usize,
    #[serde(default = "default_root_tol")]
    pub root_tol: f64,
    /// Defaults to the largest grid wavenumber.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_max: Option<f64>,
    #[serde(default)]
    pub domain: DomainShape,
}

impl Default for QuadratureSection {
    fn default() -> Self {
        Self { nodes: default_nodes(), root_tol: default_root_tol(), k_max: None, domain: DomainShape::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CollisionSection {
    #[serde(default)]
    pub convention: GammaConvention,
    #[serde(default)]
    pub route: RateRoute,
    /// Broadening time; defaults to the geometric mean of the valid window.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub averaging_time: Option<f64>,
    #[serde(default)]
    pub quadrature: QuadratureSection,
}

fn default_pmax() -> usize {
    6
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KineticSection {
    pub dt: f64,
    pub t_end: f64,
    #[serde(default = "default_pmax")]
    pub pmax: usize,
    /// Lattice index of the mode followed by the moment hierarchy.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Vec<i32>>,
    /// Initial moments are Gaussian with mean `initial_scale · n_k`.
    #[serde(default = "one")]
    pub initial_scale: f64,
    #[serde(default = "default_snapshots")]
    pub snapshots: usize,
}

fn default_snapshots() -> usize {
    10
}

fn default_cells() -> usize {
    400
}

fn default_smax_over_n() -> f64 {
    50.0
}

fn default_first_width() -> f64 {
    1e-3
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdfSection {
    #[serde(default = "default_cells")]
    pub cells: usize,
    #[serde(default = "default_smax_over_n")]
    pub smax_over_n: f64,
    /// Breaking cutoff; absent for the unbounded problem.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snl_over_n: Option<f64>,
    #[serde(default = "one")]
    pub n: f64,
    #[serde(default = "one")]
    pub eta: f64,
    /// Amplitude-space flux `F`; zero gives the Rayleigh law.
    #[serde(default)]
    pub flux: f64,
    #[serde(default = "default_closure")]
    pub closure: CutoffClosure,
    #[serde(default = "default_first_width")]
    pub first_width_over_n: f64,
    /// Defaults to half the explicit stability limit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    /// Defaults to `10/γ`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    /// Mean of the initial Rayleigh law for `pdf-evolve`, in units of `n`.
    #[serde(default = "one")]
    pub initial_n_over_n: f64,
    #[serde(default = "default_snapshots")]
    pub snapshots: usize,
}

fn default_closure() -> CutoffClosure {
    CutoffClosure::Absorbing
}

impl Default for PdfSection {
    fn default() -> Self {
        Self {
            cells: default_cells(),
            smax_over_n: default_smax_over_n(),
            snl_over_n: None,
            n: 1.0,
            eta: 1.0,
            flux: 0.0,
            closure: default_closure(),
            first_width_over_n: default_first_width(),
            dt: None,
            t_end: None,
            initial_n_over_n: 1.0,
            snapshots: default_snapshots(),
        }
    }
}

fn default_bins() -> usize {
    16
}

fn default_hist_max() -> f64 {
    8.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSection {
    pub realizations: usize,
    /// Defaults to the conservative step for the first realization.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    /// End time in units of the nonlinear time `1/(ε²ω̄)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nonlinear_times: Option<f64>,
    #[serde(default)]
    pub scheme: Scheme,
    #[serde(default)]
    pub interaction_set: InteractionSet,
    #[serde(default)]
    pub amplitudes: AmplitudeSpec,
    #[serde(default)]
    pub omega_policy: OmegaPolicy,
    #[serde(default = "default_snapshots")]
    pub snapshots: usize,
    #[serde(default)]
    pub keep_final_states: bool,
    #[serde(default = "default_bins")]
    pub histogram_bins: usize,
    /// Upper histogram edge in units of each mode's mean intensity.
    #[serde(default = "default_hist_max")]
    pub histogram_max_over_n: f64,
}

impl EnsembleSection {
    pub fn end_time(&self, model: &WaveModel) -> Result<f64> {
        match (self.t_end, self.nonlinear_times) {
            (Some(t), None) => Ok(t),
            (None, Some(x)) => {
                let rate = model.epsilon.powi(2) * model.mean_frequency();
                if !(rate > 0.0) {
                    bail!("ensemble.nonlinear_times needs epsilon > 0 and nonzero frequencies");
                }
                Ok(x / rate)
            }
            _ => bail!("ensemble: set exactly one of t_end and nonlinear_times"),
        }
    }
}

/// Per-mode ceiling on `|b|²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CapLevel {
    /// The breaking estimate `s_nl(k)`; the zero mode is left uncapped.
    Critical,
    /// `over_n · n_k` of the initial spectrum.
    Multiple { over_n: f64 },
}

fn default_cadence() -> usize {
    1
}

fn default_probe_s() -> f64 {
    8.0
}

fn default_threshold() -> f64 {
    10.0
}

fn default_burn_in() -> f64 {
    0.5
}

fn default_confidence() -> f64 {
    0.95
}

fn default_clip() -> CapPolicy {
    CapPolicy::Clip
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapSection {
    pub level: CapLevel,
    #[serde(default = "default_clip")]
    pub policy: CapPolicy,
    #[serde(default = "default_cadence")]
    pub cadence: usize,
    /// Forcing strength `D` (`E|ξ|² = D dt`) on modes with `0 < |k| ≤ forcing_k_max`.
    pub forcing: f64,
    pub forcing_k_max: f64,
    /// Damping rate on modes with `|k| ≥ damping_k_min`.
    pub damping: f64,
    pub damping_k_min: f64,
    /// Lattice index of the mode whose PDF is measured.
    pub probe_mode: Vec<i32>,
    #[serde(default = "default_probe_s")]
    pub probe_s_over_n: f64,
    /// Half width of the probe bin in units of the probe mode's mean.
    #[serde(default = "one")]
    pub probe_half_width_over_n: f64,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    /// Fraction of the run discarded before pooling snapshots.
    #[serde(default = "default_burn_in")]
    pub burn_in: f64,
    #[serde(default = "default_confidence")]
    pub confidence: f64,
}

fn default_g() -> f64 {
    9.81
}

fn default_points() -> usize {
    50
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingSection {
    #[serde(default = "default_g")]
    pub g: f64,
    pub energy_flux: f64,
    pub action_flux: f64,
    pub direction: CascadeDirection,
    pub k_min: f64,
    pub k_max: f64,
    #[serde(default = "default_points")]
    pub points: usize,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        Self::from_toml_with_seed(text, None)
    }

    /// Parses `text`, replacing its seed by `seed` when given, then validates.
    pub fn from_toml_with_seed(text: &str, seed: Option<u64>) -> Result<Self> {
        let mut cfg: Self = toml::from_str(text).map_err(|e| anyhow::anyhow!("config parse error: {e}"))?;
        if seed.is_some() {
            cfg.seed = seed;
        }
        cfg.fill_defaults()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).context("serializing config")
    }

    pub fn model(&self) -> Result<WaveModel> {
        self.wave_model.as_ref().context("missing [wave_model] section")?.build()
    }

    pub fn spectrum_section(&self) -> SpectrumSection {
        self.spectrum.unwrap_or_default()
    }

    fn require<T>(section: &Option<T>, name: &str, kind: ExperimentKind) -> Result<()> {
        if section.is_none() {
            bail!("schema error: [{name}] is required for {} experiments", kind.name());
        }
        Ok(())
    }

    fn fill_defaults(&mut self) -> Result<()> {
        use ExperimentKind::*;
        let kind = self.kind;
        if kind.is_stochastic() && self.seed.is_none() {
            bail!("schema error: seed is required for {} experiments", kind.name());
        }
        if matches!(kind, Rates | Kinetic | Moments | Ensemble | CapExperiment) {
            Self::require(&self.wave_model, "wave_model", kind)?;
            self.spectrum.get_or_insert_with(SpectrumSection::default);
        }
        match kind {
            Kinetic | Moments => Self::require(&self.kinetic, "kinetic", kind)?,
            PdfSteady | PdfEvolve => {
                self.pdf.get_or_insert_with(PdfSection::default);
            }
            Ensemble => Self::require(&self.ensemble, "ensemble", kind)?,
            CapExperiment => {
                Self::require(&self.ensemble, "ensemble", kind)?;
                Self::require(&self.cap, "cap", kind)?;
            }
            Scaling => Self::require(&self.scaling, "scaling", kind)?,
            Rates => {}
        }
        if matches!(kind, Rates | Kinetic | Moments) {
            let model = self.model()?;
            let col = self.collision.get_or_insert_with(CollisionSection::default);
            if col.route == RateRoute::Discrete && col.averaging_time.is_none() {
                col.averaging_time = Some(averaging_time_window(&model).context("collision.averaging_time")?.chosen);
            }
            if col.quadrature.k_max.is_none() {
                let k_max = model.grid.wavevectors().iter().map(|k| k.norm()).fold(0.0, f64::max);
                col.quadrature.k_max = Some(k_max);
            }
        }
        if let (Some(e), Some(wm)) = (&self.ensemble, &self.wave_model) {
            e.end_time(&wm.build()?)?;
        }
        Ok(())
    }
}

/// Reads and validates a config file.
pub fn load_config(path: &Path, seed: Option<u64>) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    ExperimentConfig::from_toml_with_seed(&text, seed).with_context(|| format!("in {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MODEL: &str = r#"
[wave_model]
epsilon = 0.1
dispersion = { kind = "power_law", c = 1.0, alpha = 2.0 }
interaction = { kind = "constant", w0 = 1.0 }
grid = { d = 1, n = 8 }
"#;

    #[test]
    fn minimal_rates_config_gets_defaults() {
        let cfg = ExperimentConfig::from_toml(&format!("kind = \"rates\"\n{MODEL}")).unwrap();
        let col = cfg.collision.unwrap();
        assert_eq!(col.quadrature.nodes, 32);
        assert_eq!(col.convention, GammaConvention::EquilibriumConsistent);
        let window = averaging_time_window(&cfg.model().unwrap()).unwrap();
        assert_eq!(col.averaging_time, Some(window.chosen));
        assert_eq!(col.quadrature.k_max, Some(4.0));
        assert_eq!(cfg.spectrum, Some(SpectrumSection::default()));
    }

    #[test]
    fn emitted_config_loads_back_identically() {
        let text = format!(
            "kind = \"ensemble\"\nseed = 3\n{MODEL}\n[ensemble]\nrealizations = 10\nnonlinear_times = 0.5\n\
             amplitudes = {{ kind = \"truncated_rayleigh\", cap = 4.0 }}\n"
        );
        let cfg = ExperimentConfig::from_toml(&text).unwrap();
        let again = ExperimentConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(again, cfg);
        for kind in ["rates", "moments"] {
            let text = format!("kind = \"{kind}\"\n{MODEL}\n[kinetic]\ndt = 0.1\nt_end = 1.0\nmode = [2]\n");
            let cfg = ExperimentConfig::from_toml(&text).unwrap();
            assert_eq!(ExperimentConfig::from_toml(&cfg.to_toml().unwrap()).unwrap(), cfg);
        }
    }

    #[test]
    fn missing_seed_is_named() {
        let text = format!("kind = \"ensemble\"\n{MODEL}\n[ensemble]\nrealizations = 10\nt_end = 1.0\n");
        let err = ExperimentConfig::from_toml(&text).unwrap_err().to_string();
        assert!(err.contains("seed"), "{err}");
    }

    #[test]
    fn duplicate_and_unknown_keys_are_rejected() {
        let dup = format!("kind = \"rates\"\nkind = \"rates\"\n{MODEL}");
        assert!(ExperimentConfig::from_toml(&dup).unwrap_err().to_string().contains("parse error"));
        let unknown = format!("kind = \"rates\"\n{MODEL}\n[collision]\nbogus = 1\n");
        let err = ExperimentConfig::from_toml(&unknown).unwrap_err().to_string();
        assert!(err.contains("bogus"), "{err}");
        let nested = "kind = \"pdf-steady\"\n[pdf]\ncells = 100\nextra = true\n";
        assert!(ExperimentConfig::from_toml(nested).is_err());
    }

    #[test]
    fn parse_errors_report_the_line() {
        let err = ExperimentConfig::from_toml("kind = \"rates\"\n[wave_model\n").unwrap_err().to_string();
        assert!(err.contains("line 2") || err.contains("2:"), "{err}");
    }

    #[test]
    fn missing_sections_are_schema_errors() {
        let err = ExperimentConfig::from_toml("kind = \"scaling\"\n").unwrap_err().to_string();
        assert!(err.contains("[scaling]"), "{err}");
        let err = ExperimentConfig::from_toml("kind = \"cap-experiment\"\nseed = 1\n").unwrap_err().to_string();
        assert!(err.contains("wave_model"), "{err}");
    }

    #[test]
    fn end_time_needs_exactly_one_rule() {
        let text = format!("kind = \"ensemble\"\nseed = 1\n{MODEL}\n[ensemble]\nrealizations = 2\n");
        assert!(ExperimentConfig::from_toml(&text).is_err());
        let text = format!("kind = \"ensemble\"\nseed = 1\n{MODEL}\n[ensemble]\nrealizations = 2\nt_end = 1.0\nnonlinear_times = 1.0\n");
        assert!(ExperimentConfig::from_toml(&text).is_err());
    }
}
