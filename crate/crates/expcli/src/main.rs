use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use wtlab_expcli::compare::{compare_report, read_series, write_report};
use wtlab_expcli::output::OutputDir;
use wtlab_expcli::{load_config, run_experiment, ExperimentKind};

#[derive(Parser)]
#[command(name = "wtlab", version, about = "Wave-turbulence amplitude-statistics laboratory")]
struct Cli {
    /// Worker threads for realization- and mode-level parallelism.
    #[arg(long, global = true, env = "WTLAB_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed; overrides `seed` in the config.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct CompareArgs {
    /// CSV with `s` and `P` columns.
    theory: PathBuf,
    /// CSV with `s`, `P` and optionally `stderr` columns.
    empirical: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Tail-fit window `LO,HI` in units of `s`.
    #[arg(long, value_name = "LO,HI", value_parser = parse_window)]
    tail: Option<(f64, f64)>,
    /// Confidence level of the tail-fit interval.
    #[arg(long, default_value_t = 0.95)]
    confidence: f64,
}

fn parse_window(text: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = text.split_once(',').ok_or("expected LO,HI")?;
    let parse = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("{v}: {e}"));
    let (lo, hi) = (parse(lo)?, parse(hi)?);
    if !(lo < hi) {
        return Err(format!("window must satisfy LO < HI, got {lo},{hi}"));
    }
    Ok((lo, hi))
}

#[derive(Subcommand)]
enum Command {
    /// Collision coefficients η_k and γ_k for a spectrum.
    Rates(RunArgs),
    /// Evolve the spectrum under the kinetic equation.
    Kinetic(RunArgs),
    /// Evolve one mode's moment hierarchy.
    Moments(RunArgs),
    /// Steady amplitude PDF, with or without a breaking cutoff.
    PdfSteady(RunArgs),
    /// Time-dependent amplitude PDF.
    PdfEvolve(RunArgs),
    /// Direct ensemble simulation of the four-wave dynamics.
    Ensemble(RunArgs),
    /// Forced, damped and capped ensemble with a probe-mode excess.
    CapExperiment(RunArgs),
    /// Cascade scaling and nonlinear wavenumber.
    Scaling(RunArgs),
    /// Compare a theoretical and an empirical PDF.
    Compare(CompareArgs),
}

/// Exit status for a completed run whose checks failed.
const CHECK_FAILURE: u8 = 2;

fn run(kind: ExperimentKind, args: RunArgs, threads: usize) -> Result<bool> {
    let config = load_config(&args.config, args.seed)?;
    if config.kind != kind {
        bail!("config kind `{}` does not match subcommand `{}`", config.kind.name(), kind.name());
    }
    let out = args.out.or_else(|| config.output.clone()).context("no output directory: pass --out or set `output`")?;
    let manifest = run_experiment(&config, &out, threads)?;
    for c in manifest.checks.iter().filter(|c| !c.passed) {
        eprintln!("check failed: {} = {:e} (rule {})", c.name, c.value, c.rule);
    }
    Ok(manifest.passed)
}

fn compare(args: CompareArgs) -> Result<bool> {
    let theory = read_series(&args.theory)?;
    let empirical = read_series(&args.empirical)?;
    let window = args.tail;
    let report = compare_report(&theory, &empirical, window, args.confidence)?;
    let mut out = OutputDir::create(&args.out)?;
    write_report(&report, &mut out)?;
    println!("{}", serde_json::to_string(&report)?);
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let threads = cli.threads.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
        eprintln!("error: thread pool: {e}");
        return ExitCode::from(1);
    }
    use ExperimentKind as K;
    let result = match cli.command {
        Command::Rates(a) => run(K::Rates, a, threads),
        Command::Kinetic(a) => run(K::Kinetic, a, threads),
        Command::Moments(a) => run(K::Moments, a, threads),
        Command::PdfSteady(a) => run(K::PdfSteady, a, threads),
        Command::PdfEvolve(a) => run(K::PdfEvolve, a, threads),
        Command::Ensemble(a) => run(K::Ensemble, a, threads),
        Command::CapExperiment(a) => run(K::CapExperiment, a, threads),
        Command::Scaling(a) => run(K::Scaling, a, threads),
        Command::Compare(a) => compare(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(CHECK_FAILURE),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
