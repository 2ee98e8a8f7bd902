use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};
use tempfile::TempDir;

const MODEL: &str = r#"
[wave_model]
epsilon = 0.1
dispersion = { kind = "power_law", c = 1.0, alpha = 0.5 }
interaction = { kind = "constant", w0 = 1.0 }
grid = { d = 1, n = 8 }
"#;

fn wtlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wtlab")).args(args).env("RUST_LOG", "error").output().unwrap()
}

/// Runs `subcommand` on `config`; returns the exit code and the output directory.
fn run(dir: &TempDir, subcommand: &str, config: &str, extra: &[&str]) -> (i32, PathBuf) {
    let path = dir.path().join(format!("{subcommand}.toml"));
    std::fs::write(&path, config).unwrap();
    let out = dir.path().join(subcommand);
    let mut args = vec![subcommand, "--config", path.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend(extra);
    let o = wtlab(&args);
    (o.status.code().unwrap(), out)
}

fn manifest(out: &Path) -> Value {
    let m: Value = serde_json::from_slice(&std::fs::read(out.join("manifest.json")).unwrap()).unwrap();
    for f in m["files"].as_array().unwrap() {
        let bytes = std::fs::read(out.join(f["path"].as_str().unwrap())).unwrap();
        assert_eq!(f["bytes"], bytes.len() as u64);
        assert_eq!(f["sha256"].as_str().unwrap(), hex::encode(Sha256::digest(&bytes)));
    }
    m
}

fn header(out: &Path, file: &str) -> String {
    std::fs::read_to_string(out.join(file)).unwrap().lines().next().unwrap().to_string()
}

#[test]
fn pdf_steady_without_flux_is_normalized() {
    let dir = TempDir::new().unwrap();
    let (code, out) = run(&dir, "pdf-steady", "kind = \"pdf-steady\"\n[pdf]\ncells = 200\n", &[]);
    assert_eq!(code, 0);
    let m = manifest(&out);
    assert_eq!(m["passed"], true);
    assert_eq!(m["checks"][0]["name"], "normalization");
    assert_eq!(header(&out, "pdf.csv"), "s,P,F");
}

#[test]
fn pdf_steady_with_cutoff_and_evolution() {
    let dir = TempDir::new().unwrap();
    let cfg = "kind = \"pdf-steady\"\n[pdf]\ncells = 300\nsnl_over_n = 100.0\nclosure = { kind = \"breaking_inflow\", flux = -0.01 }\n";
    let (code, out) = run(&dir, "pdf-steady", cfg, &[]);
    assert_eq!(code, 0);
    assert!(manifest(&out)["run"]["tail_exponent_10n_80n"].as_f64().unwrap() < -0.8);
    let cfg = "kind = \"pdf-evolve\"\n[pdf]\ncells = 100\nsmax_over_n = 30.0\nt_end = 2.0\nsnapshots = 4\n";
    let (code, out) = run(&dir, "pdf-evolve", cfg, &[]);
    assert_eq!(code, 0);
    let names: Vec<String> = manifest(&out)["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap().to_string()).collect();
    assert_eq!(names, ["mass_conservation", "rayleigh_stationarity"]);
}

#[test]
fn collision_subcommands() {
    let dir = TempDir::new().unwrap();
    let (code, out) = run(&dir, "rates", &format!("kind = \"rates\"\n{MODEL}"), &[]);
    assert_eq!(code, 0);
    assert_eq!(header(&out, "rates.csv"), "kx,k,omega,n,eta,gamma,convention,T");
    assert_eq!(std::fs::read_to_string(out.join("rates.csv")).unwrap().lines().count(), 10);
    let kinetic = format!("kind = \"kinetic\"\n{MODEL}\n[kinetic]\ndt = 0.05\nt_end = 2.0\n");
    let (code, out) = run(&dir, "kinetic", &kinetic, &[]);
    assert_eq!(code, 0);
    assert!(manifest(&out)["run"]["relative_action_change"].as_f64().unwrap().abs() < 1e-2);
    let moments = format!("kind = \"moments\"\n{MODEL}\n[kinetic]\ndt = 0.05\nt_end = 2.0\nmode = [2]\n");
    let (code, out) = run(&dir, "moments", &moments, &[]);
    assert_eq!(code, 0);
    assert_eq!(header(&out, "moments.csv"), "t,kx,p,M");
}

#[test]
fn ensemble_smoke_run() {
    let dir = TempDir::new().unwrap();
    let cfg = format!("kind = \"ensemble\"\n{MODEL}\n[ensemble]\nrealizations = 100\nnonlinear_times = 0.05\nkeep_final_states = true\n");
    let (code, out) = run(&dir, "ensemble", &cfg, &["--seed", "42"]);
    assert_eq!(code, 0);
    let m = manifest(&out);
    assert_eq!(m["seed"], 42);
    assert_eq!(m["passed"], true);
    assert_eq!(header(&out, "histogram.csv"), "kx,s_lo,s_hi,s,P,stderr,count,rayleigh,z");
    let states = std::fs::read(out.join("final_states.bin")).unwrap();
    assert!(states.len() > 100 * 8 * 16);
}

#[test]
fn scaling_run() {
    let dir = TempDir::new().unwrap();
    let cfg = "kind = \"scaling\"\n[scaling]\nenergy_flux = 1e-3\naction_flux = 1e-4\ndirection = \"direct\"\nk_min = 0.1\nk_max = 100.0\npoints = 20\n";
    let (code, out) = run(&dir, "scaling", cfg, &[]);
    assert_eq!(code, 0);
    assert_eq!(std::fs::read_to_string(out.join("scaling.csv")).unwrap().lines().count(), 21);
}

#[test]
fn failed_checks_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let cfg = format!(
        "kind = \"cap-experiment\"\nseed = 1\n{MODEL}\n[ensemble]\nrealizations = 10\nt_end = 5.0\ndt = 0.05\nsnapshots = 40\n\
         [cap]\nlevel = {{ kind = \"multiple\", over_n = 20.0 }}\nforcing = 0.01\nforcing_k_max = 1.0\ndamping = 0.1\n\
         damping_k_min = 3.0\nprobe_mode = [2]\nthreshold = 1e9\n"
    );
    let (code, out) = run(&dir, "cap-experiment", &cfg, &[]);
    assert_eq!(code, 2);
    assert_eq!(manifest(&out)["passed"], false);
}

#[test]
fn bad_input_exits_with_one() {
    let dir = TempDir::new().unwrap();
    let (code, _) = run(&dir, "ensemble", &format!("kind = \"ensemble\"\n{MODEL}\n[ensemble]\nrealizations = 100\nt_end = 1.0\n"), &[]);
    assert_eq!(code, 1);
    let (code, _) = run(&dir, "rates", "kind = \"scaling\"\n", &[]);
    assert_eq!(code, 1);
    let o = wtlab(&["rates", "--config", "/nonexistent.toml", "--out", dir.path().join("x").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nonexistent"));
}

#[test]
fn compare_subcommand() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.csv");
    std::fs::write(&a, "s,P\n0,1\n1,0.5\n2,0.25\n").unwrap();
    let out = dir.path().join("cmp");
    let o = wtlab(&["compare", a.to_str().unwrap(), a.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: Value = serde_json::from_slice(&std::fs::read(out.join("compare.json")).unwrap()).unwrap();
    assert_eq!(report["sup_distance"], 0.0);
    let b = dir.path().join("b.csv");
    std::fs::write(&b, "s,P\n1,1\n2,0.5\n4,0.25\n").unwrap();
    let o = wtlab(&["compare", b.to_str().unwrap(), b.to_str().unwrap(), "--out", out.to_str().unwrap(), "--tail", "1,4"]);
    assert!(o.status.success());
    let report: Value = serde_json::from_slice(&std::fs::read(out.join("compare.json")).unwrap()).unwrap();
    assert!((report["tail_fit"]["exponent"].as_f64().unwrap() + 1.0).abs() < 1e-12);
    let o = wtlab(&["compare", a.to_str().unwrap(), a.to_str().unwrap(), "--out", out.to_str().unwrap(), "--tail", "2,1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn shipped_configs_load() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut count = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let cfg = wtlab_expcli::load_config(&path, None).unwrap();
        assert_eq!(cfg, wtlab_expcli::ExperimentConfig::from_toml(&cfg.to_toml().unwrap()).unwrap(), "{}", path.display());
        count += 1;
    }
    assert!(count >= 5);
}
