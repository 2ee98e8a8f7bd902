use wtlab_core::collision::Spectrum;
use wtlab_core::ensemble::{estimate_pdf, realization_rng, AmplitudeSpec, RpaSampler};
use wtlab_expcli::compare::write_report;
use wtlab_expcli::output::OutputDir;
use wtlab_expcli::{compare_report, read_series, Series};

fn grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect()
}

#[test]
fn identical_series_have_zero_distance() {
    let s = grid(0.0, 10.0, 101);
    let p: Vec<f64> = s.iter().map(|x| (-x).exp()).collect();
    let a = Series::new(s.clone(), p.clone(), None).unwrap();
    let r = compare_report(&a, &a, None, 0.95).unwrap();
    assert_eq!((r.sup_distance, r.l1_distance), (0.0, 0.0));
    assert_eq!(r.points, 101);
    assert!(r.fraction_within_3sigma.is_none());
}

#[test]
fn one_over_s_tail_is_recovered() {
    let s: Vec<f64> = (0..60).map(|i| 10f64 * 10f64.powf(i as f64 / 59.0)).collect();
    let p: Vec<f64> = s.iter().map(|x| 0.3 / x).collect();
    let se: Vec<f64> = p.iter().map(|x| 0.01 * x).collect();
    let theory = Series::new(s.clone(), p.clone(), None).unwrap();
    let empirical = Series::new(s, p, Some(se)).unwrap();
    let fit = compare_report(&theory, &empirical, Some((10.0, 80.0)), 0.95).unwrap().tail_fit.unwrap();
    assert!((fit.exponent + 1.0).abs() <= 0.1, "{}", fit.exponent);
    assert!(fit.ci.0 <= fit.exponent && fit.exponent <= fit.ci.1);
}

#[test]
fn rayleigh_ensemble_agrees_bin_by_bin() {
    let sampler = RpaSampler::new(Spectrum::new(vec![1.0; 64]).unwrap(), AmplitudeSpec::Rayleigh).unwrap();
    let samples: Vec<f64> = (0..4000)
        .flat_map(|r| sampler.sample(&mut realization_rng(21, r)).amplitudes.iter().map(|b| b.norm_sqr()).collect::<Vec<_>>())
        .collect();
    let edges = grid(0.0, 6.0, 49);
    let est = estimate_pdf(&samples, &edges).unwrap();
    let centres = est.centres();
    let width = edges[1] - edges[0];
    // bin averages of the Rayleigh density
    let exact: Vec<f64> = centres.iter().map(|c| ((-(c - width / 2.0)).exp() - (-(c + width / 2.0)).exp()) / width).collect();
    let theory = Series::new(centres.clone(), exact, None).unwrap();
    let empirical = Series::new(centres, est.density.clone(), Some(est.stderr.clone())).unwrap();
    let r = compare_report(&theory, &empirical, None, 0.95).unwrap();
    assert!(r.fraction_within_3sigma.unwrap() >= 0.99, "{:?}", r.z_scores);
}

#[test]
fn disjoint_supports_are_rejected() {
    let a = Series::new(grid(0.0, 1.0, 5), vec![1.0; 5], None).unwrap();
    let b = Series::new(grid(2.0, 3.0, 5), vec![1.0; 5], None).unwrap();
    assert!(compare_report(&a, &b, None, 0.95).is_err());
}

#[test]
fn report_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pdf.csv");
    std::fs::write(&path, "s,P,stderr\n0.5,0.6,0.01\n1.0,0.37,0.01\n1.5,0.22,0.01\n").unwrap();
    let series = read_series(&path).unwrap();
    assert_eq!(series.p, vec![0.6, 0.37, 0.22]);
    let report = compare_report(&series, &series, None, 0.95).unwrap();
    let mut out = OutputDir::create(&dir.path().join("cmp")).unwrap();
    write_report(&report, &mut out).unwrap();
    let dat = std::fs::read_to_string(dir.path().join("cmp/compare.dat")).unwrap();
    assert!(dat.starts_with("# s P_theory P_empirical stderr z"));
    assert_eq!(dat.lines().count(), 4);
    let json: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("cmp/compare.json")).unwrap()).unwrap();
    assert_eq!(json["points"], 3);
}
