use std::f64::consts::PI;

use certify::ladder_nonlinear;
use entropic::{cfl_bound, GridField};
use evolve::Trajectory;

use crate::{free_energy, lyapunov_with, nonlinear_lyapunov, vfp_step, CouplingSpec, LyapunovReport, Result, VfpError, VfpState};

#[derive(Clone, Debug, PartialEq)]
pub struct VfpSpec {
    pub nx: usize,
    pub nv: usize,
    pub v_max: f64,
    pub ell: f64,
    /// `W(z) = ε₀·cos(2πz/ℓ)`, so `δ = |ε₀|`.
    pub eps0: f64,
    /// Initial datum `(1 + η cos(2πx/ℓ))·exp(−(v − u sin(2πx/ℓ))²/2)`.
    pub eta: f64,
    pub u: f64,
    pub t_end: f64,
    pub sample_every: f64,
    /// Schedule constants `K`, `k`, `ε` of the `J = 2` ladder.
    pub schedule_k: f64,
    pub schedule_exp: f64,
    pub eps: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rebracket {
    pub t: f64,
    pub old_bracket: f64,
    pub new_bracket: f64,
    /// `L` with the outgoing and the incoming coefficient.
    pub before: LyapunovReport,
    pub after: LyapunovReport,
}

impl Rebracket {
    /// `L_after / L_before`.
    pub fn jump(&self) -> f64 {
        self.after.l / self.before.l
    }
}

#[derive(Clone, Debug)]
pub struct VfpRun {
    /// Columns `free_energy` (`E(f) − E(f_∞)`), `lyapunov`, `l1_distance`, `bracket_E`, `a1`.
    pub trajectory: Trajectory,
    pub dt: f64,
    pub steps: usize,
    pub smallness: f64,
    /// Largest one-step increase of `E(f)`.
    pub max_energy_increase: f64,
    pub max_mass_drift: f64,
    pub min_value: f64,
    pub rebrackets: Vec<Rebracket>,
    /// Every sample inside its bracket satisfied `E/4 ≤ L ≤ 5E/4`.
    pub sandwich_all: bool,
    /// `min −L'/(a₁E^{1+ε})` over consecutive samples sharing a bracket.
    pub dissipation_constant: f64,
    pub final_state: VfpState,
}

impl VfpSpec {
    pub fn coupling(&self) -> Result<CouplingSpec> {
        CouplingSpec::cosine(self.eps0, self.ell)
    }

    pub fn initial_state(&self) -> Result<VfpState> {
        if self.eta.abs() >= 1.0 {
            return Err(VfpError::Invalid("η must lie in (−1, 1)".into()));
        }
        let q = 2.0 * PI / self.ell;
        let mut f = GridField::from_fn(self.nx, self.nv, self.ell, self.v_max, |x, v| {
            (1.0 + self.eta * (q * x).cos()) * (-0.5 * (v - self.u * (q * x).sin()).powi(2)).exp()
        })?;
        f.normalize()?;
        VfpState::new(f)
    }
}

fn l1_distance(state: &VfpState) -> f64 {
    let f = &state.f;
    let zm: f64 = (0..f.nv).map(|j| (-0.5 * f.v(j).powi(2)).exp()).sum::<f64>() * f.dv() * f.ell;
    let mut s = 0.0;
    for i in 0..f.nx {
        for j in 0..f.nv {
            s += (f.at(i, j) - (-0.5 * f.v(j).powi(2)).exp() / zm).abs();
        }
    }
    s * f.weight()
}

/// Runs the frozen-force splitting to `t_end`, re-evaluating the schedule whenever
/// `E(f) − E(f_∞)` drops below half the current bracket.
pub fn vfp_convergence(spec: &VfpSpec) -> Result<VfpRun> {
    if !(spec.t_end > 0.0 && spec.sample_every > 0.0 && spec.sample_every <= spec.t_end) {
        return Err(VfpError::Invalid("need 0 < sample_every ≤ t_end".into()));
    }
    let w = spec.coupling()?;
    let mut state = spec.initial_state()?;
    // |F| ≤ Σ|c_k|·q_k·(|∫ρ cos| + |∫ρ sin|) ≤ 2Σ|c_k|q_k.
    let fmax: f64 = w.modes.iter().map(|(k, c)| 2.0 * c.abs() * 2.0 * PI * *k as f64 / w.ell).sum();
    let bound = cfl_bound(&state.f, fmax);
    let per_sample = (spec.sample_every / bound * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    let dt = spec.sample_every / per_sample as f64;
    let n_samples = (spec.t_end / spec.sample_every).round() as usize;

    let e0 = free_energy(&state, &w)?.relative();
    if !(e0 > 0.0) {
        return Err(VfpError::Invalid("initial datum is already at equilibrium".into()));
    }
    let schedule = |e: f64| ladder_nonlinear(spec.schedule_k, e0, e, spec.schedule_exp, 2, spec.eps);
    let mut bracket = e0;
    let mut sched = schedule(bracket)?;

    let mut times = Vec::with_capacity(n_samples + 1);
    let mut cols: [Vec<f64>; 5] = Default::default();
    let mut rebrackets = Vec::new();
    let mut sandwich_all = true;
    let mut dissipation = f64::INFINITY;
    let mut last: Option<(f64, LyapunovReport)> = None;

    let mut sample = |t: f64, st: &VfpState, sched: &certify::NonlinearLadder, last: &mut Option<(f64, LyapunovReport)>| -> Result<()> {
        let r = nonlinear_lyapunov(st, &w, sched)?;
        if r.in_bracket && !r.sandwich_holds {
            sandwich_all = false;
        }
        if let Some((t0, r0)) = last {
            if r0.bracket == r.bracket && r.a1 > 0.0 {
                let rate = -(r.l - r0.l) / (t - *t0);
                dissipation = dissipation.min(rate / (r.a1 * r.e_rel.powf(1.0 + spec.eps)));
            }
        }
        *last = Some((t, r));
        times.push(t);
        for (c, v) in cols.iter_mut().zip([r.e_rel, r.l, l1_distance(st), r.bracket, r.a1]) {
            c.push(v);
        }
        Ok(())
    };
    sample(0.0, &state, &sched, &mut last)?;

    let mut e_prev = free_energy(&state, &w)?.total;
    let (mut max_inc, mut drift, mut min_value) = (f64::NEG_INFINITY, 0.0f64, f64::INFINITY);
    for s in 1..=n_samples {
        for n in 1..=per_sample {
            state = vfp_step(&state, &w, dt)?;
            let fe = free_energy(&state, &w)?;
            max_inc = max_inc.max(fe.total - e_prev);
            e_prev = fe.total;
            drift = drift.max((state.f.mass() - 1.0).abs());
            min_value = min_value.min(state.f.values.iter().cloned().fold(f64::INFINITY, f64::min));
            let e = fe.relative();
            if e < 0.5 * bracket {
                let t = ((s - 1) * per_sample + n) as f64 * dt;
                let before = lyapunov_with(&state, &w, sched.a[0], bracket)?;
                let old = bracket;
                while e < 0.5 * bracket {
                    bracket *= 0.5;
                }
                sched = schedule(bracket)?;
                let after = nonlinear_lyapunov(&state, &w, &sched)?;
                rebrackets.push(Rebracket { t, old_bracket: old, new_bracket: bracket, before, after });
            }
        }
        sample(s as f64 * spec.sample_every, &state, &sched, &mut last)?;
    }
    let sandwich_all = sandwich_all && rebrackets.iter().all(|r| r.after.sandwich_holds);
    let mut trajectory = Trajectory::new(times)?;
    for (name, c) in ["free_energy", "lyapunov", "l1_distance", "bracket_E", "a1"].iter().zip(cols) {
        trajectory.insert(name, c)?;
    }
    Ok(VfpRun {
        trajectory,
        dt,
        steps: n_samples * per_sample,
        smallness: w.smallness(),
        max_energy_increase: max_inc,
        max_mass_drift: drift,
        min_value,
        rebrackets,
        sandwich_all,
        dissipation_constant: dissipation,
        final_state: state,
    })
}
