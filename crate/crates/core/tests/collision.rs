use std::f64::consts::PI;

use proptest::prelude::*;
use wtlab_core::collision::*;
use wtlab_core::wave_model::*;

fn model_1d(n: usize, alpha: f64, eps: f64) -> WaveModel {
    WaveModel::new(
        DispersionLaw::power_law(1.0, alpha).unwrap(),
        InteractionModel::constant(1.0),
        eps,
        SpectralGrid::new(1, n, 2.0 * PI).unwrap(),
    )
    .unwrap()
}

fn model_2d(n: usize, alpha: f64) -> WaveModel {
    WaveModel::new(
        DispersionLaw::power_law(1.0, alpha).unwrap(),
        InteractionModel::constant(1.0),
        0.1,
        SpectralGrid::new(2, n, 2.0 * PI).unwrap(),
    )
    .unwrap()
}

/// Independent O(N³) evaluation: all triples (1, 2, 3) with an explicit
/// lattice Kronecker check and the kernel written out from its definition.
fn brute_force(model: &WaveModel, n: &[f64], t: f64) -> (Vec<f64>, Vec<f64>) {
    let g = &model.grid;
    let kern = |x: f64| if x == 0.0 { t / (2.0 * PI) } else { 2.0 * (x * t / 2.0).sin().powi(2) / (PI * t * x * x) };
    let om: Vec<f64> = (0..g.len()).map(|i| model.dispersion.dispersion(&g.wavevector(i))).collect();
    let mut eta = vec![0.0; g.len()];
    let mut gamma = vec![0.0; g.len()];
    for k in 0..g.len() {
        let mk = g.lattice_index(k);
        for a in 0..g.len() {
            let ma = g.lattice_index(a);
            for b in 0..g.len() {
                let mb = g.lattice_index(b);
                for c in 0..g.len() {
                    let mc = g.lattice_index(c);
                    if (0..2).any(|d| mk[d] + ma[d] - mb[d] - mc[d] != 0) {
                        continue;
                    }
                    let w = model.coupling(k, a, b, c);
                    let kt = kern(om[k] + om[a] - om[b] - om[c]);
                    eta[k] += w * w * kt * n[a] * n[b] * n[c];
                    gamma[k] += w * w * kt * (n[a] * n[b] + n[a] * n[c] - n[b] * n[c]);
                }
            }
        }
        let pref = 4.0 * PI * model.epsilon * model.epsilon;
        eta[k] *= pref;
        gamma[k] *= pref;
    }
    (eta, gamma)
}

#[test]
fn discrete_rates_match_brute_force_oracle() {
    let m = model_1d(8, 2.0, 0.1);
    let kernel = BroadenedKernel::new(50.0).unwrap();
    for spectrum in [Spectrum::constant(&m.grid, 1.0).unwrap(), Spectrum::from_fn(&m.grid, |k| 1.0 / (1.0 + k.norm().powi(2))).unwrap()] {
        let r = rates_discrete(&m, &spectrum, &kernel, GammaConvention::EquilibriumConsistent).unwrap();
        let (eta, gamma) = brute_force(&m, spectrum.values(), 50.0);
        for k in 0..m.grid.len() {
            assert!((r.eta[k] - eta[k]).abs() <= 1e-12 * eta[k].abs().max(1e-300), "eta mode {k}");
            assert!((r.gamma[k] - gamma[k]).abs() <= 1e-12 * gamma[k].abs().max(1e-300), "gamma mode {k}");
        }
    }
}

#[test]
fn discrete_constant_spectrum_is_stationary() {
    let m = model_1d(32, 2.0, 0.1);
    let kernel = BroadenedKernel::new(averaging_time_window(&m).unwrap().chosen).unwrap();
    let r = rates_discrete(&m, &Spectrum::constant(&m.grid, 0.7).unwrap(), &kernel, GammaConvention::default()).unwrap();
    for k in 0..m.grid.len() {
        assert!(r.eta[k] > 0.0);
        assert!((r.eta[k] - 0.7 * r.gamma[k]).abs() <= 1e-10 * r.eta[k]);
    }
}

#[test]
fn literal_convention_breaks_stationarity_of_constant_spectrum() {
    let m = model_1d(16, 1.5, 0.1);
    let kernel = BroadenedKernel::new(2.0).unwrap();
    let r = rates_discrete(&m, &Spectrum::constant(&m.grid, 1.0).unwrap(), &kernel, GammaConvention::Literal).unwrap();
    let worst = (0..m.grid.len()).map(|k| ((r.eta[k] - r.gamma[k]) / r.eta[k]).abs()).fold(0.0, f64::max);
    assert!(worst > 1e-3, "literal form unexpectedly stationary: {worst}");
}

#[test]
fn kernel_integrates_to_one_over_wide_window() {
    let t = 4.0;
    let k = BroadenedKernel::new(t).unwrap();
    let a = 1000.0 / t;
    let n = 2_000_000;
    let h = 2.0 * a / n as f64;
    let mut s = k.weight(-a) + k.weight(a);
    for i in 1..n {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * k.weight(-a + i as f64 * h);
    }
    let mass = s * h / 3.0;
    assert!((mass - 1.0).abs() < 1e-2, "mass {mass}");
}

fn quad(nodes: usize, k_max: f64) -> QuadratureSpec {
    QuadratureSpec::new(nodes, 1e-12, k_max, DomainShape::Square).unwrap()
}

#[test]
fn continuum_zero_spectrum_and_homogeneity() {
    let m = model_2d(8, 2.5);
    let q = quad(16, 4.5);
    let k = Wavevector::new(1.0, 0.5);
    let zero = rates_continuum_at(&m, &k, &|_| 0.0, &q, GammaConvention::default()).unwrap();
    assert_eq!((zero.eta, zero.gamma), (0.0, 0.0));
    let n = |s: f64| 1.0 / (1.0 + s * s);
    let n2 = |s: f64| 2.0 / (1.0 + s * s);
    let a = rates_continuum_at(&m, &k, &n, &q, GammaConvention::default()).unwrap();
    let b = rates_continuum_at(&m, &k, &n2, &q, GammaConvention::default()).unwrap();
    assert!(a.eta > 0.0);
    assert!((b.eta - 8.0 * a.eta).abs() <= 1e-12 * b.eta);
    assert!((b.gamma - 4.0 * a.gamma).abs() <= 1e-12 * b.gamma.abs());
}

#[test]
fn continuum_constant_and_rayleigh_jeans_spectra_are_stationary() {
    let m = model_2d(8, 2.5);
    let q = quad(24, 4.5);
    for k in [Wavevector::new(1.0, 0.0), Wavevector::new(2.0, 1.5)] {
        let c = rates_continuum_at(&m, &k, &|_| 1.3, &q, GammaConvention::default()).unwrap();
        assert!((c.eta - 1.3 * c.gamma).abs() <= 1e-2 * c.eta);
        let rj = |s: f64| 1.0 / (m.dispersion.omega(s) + 2.0);
        let r = rates_continuum_at(&m, &k, &rj, &q, GammaConvention::default()).unwrap();
        assert!((r.eta - rj(k.norm()) * r.gamma).abs() <= 1e-2 * r.eta, "RJ residual at {k:?}: {r:?}");
    }
}

#[test]
fn continuum_needs_two_dimensions() {
    let m = model_1d(8, 2.0, 0.1);
    let q = quad(8, 4.0);
    let r = eta_continuum(&m, &Wavevector::along_x(1.0), &|_| 1.0, &q);
    assert!(matches!(r, Err(wtlab_core::Error::Unsupported(_))));
}

#[test]
fn continuum_converges_under_refinement() {
    let m = model_2d(8, 2.5);
    let k = Wavevector::new(1.5, 0.0);
    let n = |s: f64| (1.0 + s * s / 4.0).powi(-2);
    let coarse = eta_continuum(&m, &k, &n, &quad(24, 8.5)).unwrap();
    let fine = eta_continuum(&m, &k, &n, &quad(48, 8.5)).unwrap();
    assert!(((coarse - fine) / fine).abs() < 5e-3, "{coarse} vs {fine}");
}

#[test]
fn discrete_and_continuum_routes_agree() {
    // N = 32 lattice with unit spacing; the continuum domain is the square
    // covered by the lattice cells.
    let m = model_2d(32, 3.0);
    let n = |s: f64| (1.0 + s * s / 16.0).powi(-2);
    let spectrum = Spectrum::from_fn(&m.grid, |k| n(k.norm())).unwrap();
    let kernel = BroadenedKernel::new(averaging_time_window(&m).unwrap().chosen).unwrap();
    let mode = m.grid.index_of([3, 0]).unwrap();
    let (eta_d, gamma_d) = rates_discrete_at(&m, &spectrum, &kernel, GammaConvention::default(), &[mode]).unwrap()[0];
    let q = quad(48, m.grid.half_width() as f64 + 0.5);
    let c = rates_continuum_at(&m, &m.grid.wavevector(mode), &n, &q, GammaConvention::default()).unwrap();
    let factor = continuum_to_discrete_factor(&m.grid);
    assert!((eta_d / (factor * c.eta) - 1.0).abs() < 0.05, "eta {eta_d} vs {}", factor * c.eta);
    assert!((gamma_d / (factor * c.gamma) - 1.0).abs() < 0.05, "gamma {gamma_d} vs {}", factor * c.gamma);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn discrete_homogeneity(scale in 0.1f64..5.0, seed in 0u64..1000) {
        let m = model_1d(8, 1.5, 0.2);
        let kernel = BroadenedKernel::new(3.0).unwrap();
        let base = Spectrum::from_fn(&m.grid, |k| 1.0 + ((k.x + seed as f64) * 1.7).sin().abs()).unwrap();
        let scaled = Spectrum::new(base.values().iter().map(|v| v * scale).collect()).unwrap();
        let a = rates_discrete(&m, &base, &kernel, GammaConvention::default()).unwrap();
        let b = rates_discrete(&m, &scaled, &kernel, GammaConvention::default()).unwrap();
        for k in 0..m.grid.len() {
            prop_assert!((b.eta[k] - scale.powi(3) * a.eta[k]).abs() <= 1e-12 * b.eta[k].abs());
            prop_assert!((b.gamma[k] - scale.powi(2) * a.gamma[k]).abs() <= 1e-12 * b.gamma[k].abs().max(a.gamma[k].abs()));
        }
    }

    #[test]
    fn eta_is_nonnegative(values in proptest::collection::vec(0.0f64..3.0, 9)) {
        let m = model_1d(8, 2.0, 0.1);
        let kernel = BroadenedKernel::new(7.0).unwrap();
        let eta = eta_discrete(&m, &Spectrum::new(values).unwrap(), &kernel).unwrap();
        prop_assert!(eta.iter().all(|e| *e >= 0.0));
    }
}
