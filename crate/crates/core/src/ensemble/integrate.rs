use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::system::QuarticSystem;
use super::ModeState;
use crate::error::{Error, Result};

/// Relative drift of action or energy that aborts a conservative run.
pub const DRIFT_ALARM: f64 = 1e-6;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Classical RK4 on the non-rotating amplitudes `c`.
    #[default]
    Rk4,
    /// RK4 on the interaction-representation amplitudes `b`, so the linear
    /// rotation is exact and only the nonlinear term limits the step.
    IntegratingFactorRk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CapPolicy {
    /// Rescale to `√s_nl`, keeping the phase.
    Clip,
    /// Rescale to `√s_nl` and draw a fresh uniform phase.
    Redistribute,
}

/// Breaking ceiling per mode; `f64::INFINITY` leaves a mode uncapped.
#[derive(Debug, Clone, PartialEq)]
pub struct Cap {
    pub levels: Vec<f64>,
    pub policy: CapPolicy,
    /// Apply after every `cadence` steps.
    pub cadence: usize,
}

impl Cap {
    /// Applies the ceiling in place and returns the number of modes touched.
    pub fn apply(&self, z: &mut [C64], rng: &mut impl Rng) -> usize {
        let mut hits = 0;
        for (v, &level) in z.iter_mut().zip(&self.levels) {
            let s = v.norm_sqr();
            if s > level {
                hits += 1;
                *v = match self.policy {
                    CapPolicy::Clip => *v * (level / s).sqrt(),
                    CapPolicy::Redistribute => C64::from_polar(level.sqrt(), rng.random::<f64>() * std::f64::consts::TAU),
                };
            }
        }
        hits
    }
}

/// White-noise forcing and linear damping, both per mode.
#[derive(Debug, Clone, PartialEq)]
pub struct Drive {
    /// Injection rate `D_l`: each step adds a complex Gaussian with `E|ξ|² = D_l dt`.
    pub forcing: Vec<f64>,
    /// Damping rate `ν_l`: each step multiplies by `e^{−ν_l dt}`.
    pub damping: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOptions {
    pub dt: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    /// Keep a snapshot every this many steps (plus the first and last state).
    pub snapshot_every: usize,
    pub cap: Option<Cap>,
    pub drive: Option<Drive>,
    /// Relative drift that aborts a conservative run; `None` only records it.
    pub drift_alarm: Option<f64>,
}

impl StepOptions {
    pub fn new(dt: f64, t_end: f64) -> Self {
        Self { dt, t_end, scheme: Scheme::Rk4, snapshot_every: usize::MAX, cap: None, drive: None, drift_alarm: Some(DRIFT_ALARM) }
    }

    fn is_conservative(&self) -> bool {
        self.cap.is_none() && self.drive.is_none()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegrationReport {
    pub final_state: ModeState,
    pub snapshots: Vec<ModeState>,
    /// Largest relative deviation of `Σ|c|²` from its initial value.
    pub action_drift: f64,
    /// Largest relative deviation of `H` from its initial value.
    pub energy_drift: f64,
    pub steps: usize,
    pub cap_hits: usize,
}

/// Step of order `0.01` in both the fastest linear and nonlinear frequency.
pub fn default_dt(system: &QuarticSystem, state: &ModeState) -> f64 {
    let nonlinear = nonlinear_rate(system, state);
    let linear = system.max_frequency();
    0.01 / linear.max(nonlinear).max(f64::MIN_POSITIVE)
}

/// `max|Ω| + ε · max|W| · Σ|b|²`.
fn nonlinear_rate(system: &QuarticSystem, state: &ModeState) -> f64 {
    let shift = system.frequency_shift(&state.amplitudes).into_iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    let action: f64 = state.amplitudes.iter().map(|b| b.norm_sqr()).sum();
    shift + system.epsilon.abs() * system.max_diagonal_coupling() * action
}

/// Checks `dt · (max|Ω| + ε·scale) < 0.1`, and `dt · max ω ≤ 1` for plain RK4.
pub fn check_step(system: &QuarticSystem, state: &ModeState, dt: f64, scheme: Scheme) -> Result<()> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::StabilityGuard(format!("time step must be positive, got {dt}")));
    }
    let rate = nonlinear_rate(system, state);
    if dt * rate >= 0.1 {
        return Err(Error::StabilityGuard(format!("dt·(max|Ω| + ε·scale) = {:.3e} ≥ 0.1", dt * rate)));
    }
    if scheme == Scheme::Rk4 && dt * system.max_frequency() > 1.0 {
        return Err(Error::StabilityGuard(format!("dt·max ω = {:.3e} > 1 for RK4 in non-rotating variables", dt * system.max_frequency())));
    }
    Ok(())
}

struct Workspace {
    k: [Vec<C64>; 4],
    tmp: Vec<C64>,
    /// `e^{−iωt}` at the start, middle and end of an IF step.
    phase: [Vec<C64>; 3],
    rotated: Vec<C64>,
    scratch: Vec<C64>,
}

impl Workspace {
    fn new(n: usize) -> Self {
        let z = vec![C64::new(0.0, 0.0); n];
        Self {
            k: [z.clone(), z.clone(), z.clone(), z.clone()],
            tmp: z.clone(),
            phase: [z.clone(), z.clone(), z.clone()],
            rotated: z,
            scratch: Vec::new(),
        }
    }
}

fn rk4_step(sys: &QuarticSystem, c: &mut [C64], h: f64, ws: &mut Workspace) {
    let n = c.len();
    let Workspace { k, tmp, scratch, .. } = ws;
    sys.rhs_into(c, &mut k[0], scratch);
    for i in 0..n {
        tmp[i] = c[i] + k[0][i] * (0.5 * h);
    }
    sys.rhs_into(tmp, &mut k[1], scratch);
    for i in 0..n {
        tmp[i] = c[i] + k[1][i] * (0.5 * h);
    }
    sys.rhs_into(tmp, &mut k[2], scratch);
    for i in 0..n {
        tmp[i] = c[i] + k[2][i] * h;
    }
    sys.rhs_into(tmp, &mut k[3], scratch);
    for i in 0..n {
        c[i] += (k[0][i] + (k[1][i] + k[2][i]) * 2.0 + k[3][i]) * (h / 6.0);
    }
}

/// `ḃ = −iε e^{iωt} N(e^{−iωt} b)`.
/// `ḃ = −iε e^{iωt} N(e^{−iωt} b)` with `phase = e^{−iωt}`.
fn interaction_rhs(sys: &QuarticSystem, phase: &[C64], b: &[C64], out: &mut [C64], c: &mut [C64], scratch: &mut Vec<C64>) {
    let n = b.len();
    for i in 0..n {
        c[i] = b[i] * phase[i];
    }
    sys.nonlinear_into(c, out, scratch);
    for i in 0..n {
        let v = out[i] * phase[i].conj() * sys.epsilon;
        out[i] = C64::new(v.im, -v.re);
    }
}

fn if_step(sys: &QuarticSystem, b: &mut [C64], t: f64, h: f64, ws: &mut Workspace) {
    let n = b.len();
    let Workspace { k, tmp, phase, rotated, scratch } = ws;
    let [start, mid, end] = phase;
    for i in 0..n {
        start[i] = C64::from_polar(1.0, -sys.omega[i] * t);
        let half = C64::from_polar(1.0, -sys.omega[i] * 0.5 * h);
        mid[i] = start[i] * half;
        end[i] = mid[i] * half;
    }
    interaction_rhs(sys, start, b, &mut k[0], rotated, scratch);
    for i in 0..n {
        tmp[i] = b[i] + k[0][i] * (0.5 * h);
    }
    interaction_rhs(sys, mid, tmp, &mut k[1], rotated, scratch);
    for i in 0..n {
        tmp[i] = b[i] + k[1][i] * (0.5 * h);
    }
    interaction_rhs(sys, mid, tmp, &mut k[2], rotated, scratch);
    for i in 0..n {
        tmp[i] = b[i] + k[2][i] * h;
    }
    interaction_rhs(sys, end, tmp, &mut k[3], rotated, scratch);
    for i in 0..n {
        b[i] += (k[0][i] + (k[1][i] + k[2][i]) * 2.0 + k[3][i]) * (h / 6.0);
    }
}

/// Advances one realization to `t_end` from `state.time`.
///
/// Conservative runs (no cap, no drive) monitor `Σ|c|²` and `H` and fail
/// with [`Error::ConservationDrift`] once either drifts by more than
/// `opts.drift_alarm`.
pub fn integrate(system: &QuarticSystem, state: &ModeState, opts: &StepOptions, rng: &mut impl Rng) -> Result<IntegrationReport> {
    let n = system.len();
    if state.amplitudes.len() != n {
        return Err(Error::SizeMismatch { expected: n, actual: state.amplitudes.len() });
    }
    check_step(system, state, opts.dt, opts.scheme)?;
    let span = opts.t_end - state.time;
    if !(span >= 0.0 && span.is_finite()) {
        return Err(Error::Domain(format!("end time {} precedes the state time {}", opts.t_end, state.time)));
    }
    if let Some(cap) = &opts.cap {
        if cap.levels.len() != n || cap.cadence == 0 {
            return Err(Error::Domain("cap needs one level per mode and a positive cadence".into()));
        }
    }
    if let Some(d) = &opts.drive {
        if d.forcing.len() != n || d.damping.len() != n {
            return Err(Error::SizeMismatch { expected: n, actual: d.forcing.len().min(d.damping.len()) });
        }
    }
    let steps = (span / opts.dt - 1e-9).ceil().max(0.0) as usize;
    let every = opts.snapshot_every.max(1);
    let conservative = opts.is_conservative();
    let mut z = match opts.scheme {
        Scheme::Rk4 => state.non_rotating(&system.omega),
        Scheme::IntegratingFactorRk4 => state.amplitudes.clone(),
    };
    let to_state = |z: &[C64], t: f64| match opts.scheme {
        Scheme::Rk4 => ModeState::from_non_rotating(z, &system.omega, t),
        Scheme::IntegratingFactorRk4 => ModeState::new(z.to_vec(), t),
    };
    let to_c = |z: &[C64], t: f64| match opts.scheme {
        Scheme::Rk4 => z.to_vec(),
        Scheme::IntegratingFactorRk4 => ModeState::new(z.to_vec(), t).non_rotating(&system.omega),
    };
    let action0 = system.action(&z);
    let energy0 = system.hamiltonian(&to_c(&z, state.time));
    let energy_scale = energy0.abs().max(f64::MIN_POSITIVE);
    let check_every = (steps / 2000).max(1);
    let mut report = IntegrationReport {
        final_state: state.clone(),
        snapshots: vec![state.clone()],
        action_drift: 0.0,
        energy_drift: 0.0,
        steps,
        cap_hits: 0,
    };
    let mut ws = Workspace::new(n);
    let mut t = state.time;
    for step in 0..steps {
        let last = step + 1 == steps;
        let h = if last { opts.t_end - t } else { opts.dt };
        match opts.scheme {
            Scheme::Rk4 => rk4_step(system, &mut z, h, &mut ws),
            Scheme::IntegratingFactorRk4 => if_step(system, &mut z, t, h, &mut ws),
        }
        t = if last { opts.t_end } else { t + h };
        if let Some(d) = &opts.drive {
            for i in 0..n {
                if d.damping[i] != 0.0 {
                    z[i] *= (-d.damping[i] * h).exp();
                }
                if d.forcing[i] != 0.0 {
                    let amp = (0.5 * d.forcing[i] * h).sqrt();
                    let (re, im): (f64, f64) = (rng.sample(StandardNormal), rng.sample(StandardNormal));
                    z[i] += C64::new(re, im) * amp;
                }
            }
        }
        if let Some(cap) = &opts.cap {
            if (step + 1) % cap.cadence == 0 {
                report.cap_hits += cap.apply(&mut z, rng);
            }
        }
        if conservative && ((step + 1) % check_every == 0 || last) {
            let da = (system.action(&z) - action0).abs() / action0.max(f64::MIN_POSITIVE);
            let de = (system.hamiltonian(&to_c(&z, t)) - energy0).abs() / energy_scale;
            report.action_drift = report.action_drift.max(da);
            report.energy_drift = report.energy_drift.max(de);
            if let Some(alarm) = opts.drift_alarm {
                if da > alarm {
                    return Err(Error::ConservationDrift { quantity: "wave action", drift: da });
                }
                if de > alarm {
                    return Err(Error::ConservationDrift { quantity: "Hamiltonian", drift: de });
                }
            }
        }
        if (step + 1) % every == 0 && !last {
            report.snapshots.push(to_state(&z, t));
        }
    }
    report.final_state = to_state(&z, t);
    if steps > 0 {
        report.snapshots.push(report.final_state.clone());
    }
    Ok(report)
}
