use evolve::{diffineq_check, fit_rate, herau_check, nash_check, nash_theta, DiffIneqInstance, FitKind, PlaneWaveSolution};

use super::ctx;
use crate::config::{require, Config};
use crate::output::{num, Outcome, Plot, Table};
use crate::Result;

/// Rough datum `ξ_j = ratio^j ≤ ξ_max` with weights `ξ_j^{−s/2}`.
#[derive(Clone, Copy, Debug)]
pub struct Rough {
    pub s: f64,
    pub xi_max: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug)]
pub enum RegularizePlan {
    Exponents { rough: Rough, window: (f64, f64), points: usize, herau: (f64, f64, f64), herau_t_end: f64, herau_points: usize },
    DiffIneq { rough: Rough, synthetic: [f64; 4], a: f64, k: f64, t0: f64, points: usize, delta: f64, theta: f64 },
    Nash { members: usize, nx: usize, nv: usize, lx: f64, lv: f64, exps: [f64; 4], base: f64 },
}

fn rough(cfg: &Config) -> Result<Rough> {
    let r = Rough {
        s: cfg.f64_or("rough.s", 0.02)?,
        xi_max: cfg.f64_or("rough.xi_max", 1e7)?,
        ratio: cfg.f64_or("rough.ratio", 1.25)?,
    };
    require("rough.s", r.s >= 0.0, "must be nonnegative")?;
    require("rough.xi_max", r.xi_max >= 1.0, "must be at least 1")?;
    require("rough.ratio", r.ratio > 1.0, "must exceed 1")?;
    Ok(r)
}

fn log_grid(t0: f64, t1: f64, points: usize) -> Vec<f64> {
    (0..points).map(|i| t0 * (t1 / t0).powf(i as f64 / (points - 1) as f64)).collect()
}

impl RegularizePlan {
    pub fn parse(cfg: &Config) -> Result<Self> {
        match cfg.choice("regularize.task", None, &["exponents", "diffineq", "nash"])?.as_str() {
            "exponents" => {
                let window = (cfg.f64_or("time.t0", 1e-3)?, cfg.f64_or("time.t1", 1e-1)?);
                let points = cfg.usize_or("time.points", 41)?;
                require("time.t0", window.0 > 0.0 && window.0 < window.1, "need 0 < t0 < t1")?;
                require("time.points", points >= 3, "need at least 3 points")?;
                let herau = (cfg.f64_or("herau.a", 0.1)?, cfg.f64_or("herau.b", 0.01)?, cfg.f64_or("herau.c", 0.001)?);
                let (a, b, c) = herau;
                require("herau.b", 0.0 < c && c <= b && b <= a && a <= 1.0 && b * b <= a * c, "need 0 < c ≤ b ≤ a ≤ 1 and b² ≤ ac")?;
                let herau_t_end = cfg.f64_or("herau.t_end", 1.0)?;
                let herau_points = cfg.usize_or("herau.points", 10_001)?;
                require("herau.t_end", herau_t_end > 0.0, "must be positive")?;
                require("herau.points", herau_points >= 2, "need at least 2 points")?;
                Ok(RegularizePlan::Exponents { rough: rough(cfg)?, window, points, herau, herau_t_end, herau_points })
            }
            "diffineq" => {
                let synthetic = [
                    cfg.f64_or("synthetic.c", 10.0)?,
                    cfg.f64_or("synthetic.k", 0.1)?,
                    cfg.f64_or("synthetic.delta", 0.5)?,
                    cfg.f64_or("synthetic.theta", 0.5)?,
                ];
                require("synthetic.delta", synthetic[2] > 0.0 && synthetic[2] <= 1.0, "must lie in (0, 1]")?;
                require("synthetic.theta", synthetic[3] > 0.0 && synthetic[3] < 1.0, "must lie in (0, 1)")?;
                let plan = RegularizePlan::DiffIneq {
                    rough: rough(cfg)?,
                    synthetic,
                    a: cfg.f64_or("map.a", 0.1)?,
                    k: cfg.f64_or("map.k", 0.01)?,
                    t0: cfg.f64_or("map.t0", 1e-3)?,
                    points: cfg.usize_or("map.points", 3001)?,
                    delta: cfg.f64_or("map.delta", 1.0 / 3.0)?,
                    theta: cfg.f64_or("map.theta", 0.25)?,
                };
                if let RegularizePlan::DiffIneq { a, k, t0, points, delta, theta, .. } = &plan {
                    require("map.a", *a > 0.0, "must be positive")?;
                    require("map.k", *k > 0.0, "must be positive")?;
                    require("map.t0", *t0 > 0.0 && *t0 < 1.0, "must lie in (0, 1)")?;
                    require("map.points", *points >= 10, "need at least 10 points")?;
                    require("map.delta", *delta > 0.0 && *delta <= 1.0, "must lie in (0, 1]")?;
                    require("map.theta", *theta > 0.0 && *theta < 1.0, "must lie in (0, 1)")?;
                }
                Ok(plan)
            }
            _ => {
                let e = cfg.f64_list_or("nash.exponents", &[0.0, 1.0, 1.0, 3.0])?;
                require("nash.exponents", e.len() == 4, "need four exponents (λ, μ, λ′, μ′)")?;
                let plan = RegularizePlan::Nash {
                    members: cfg.usize_or("nash.members", 7)?,
                    nx: cfg.usize_or("nash.nx", 1024)?,
                    nv: cfg.usize_or("nash.nv", 256)?,
                    lx: cfg.f64_or("nash.lx", 64.0)?,
                    lv: cfg.f64_or("nash.lv", 24.0)?,
                    exps: [e[0], e[1], e[2], e[3]],
                    base: cfg.f64_or("nash.base", 4.0)?,
                };
                if let RegularizePlan::Nash { members, nx, nv, lx, lv, base, .. } = &plan {
                    require("nash.members", *members >= 2, "need at least two members")?;
                    require("nash.nx", *nx >= 16, "need at least 16 points")?;
                    require("nash.nv", *nv >= 16, "need at least 16 points")?;
                    require("nash.lx", *lx > 0.0, "must be positive")?;
                    require("nash.lv", *lv > 0.0, "must be positive")?;
                    require("nash.base", *base > 1.0, "must exceed 1")?;
                }
                Ok(plan)
            }
        }
    }

    pub fn execute(&self) -> Result<Outcome> {
        match self {
            RegularizePlan::Exponents { rough, window, points, herau, herau_t_end, herau_points } => {
                exponents(*rough, *window, *points, *herau, *herau_t_end, *herau_points)
            }
            RegularizePlan::DiffIneq { rough, synthetic, a, k, t0, points, delta, theta } => {
                diffineq(*rough, *synthetic, *a, *k, *t0, *points, *delta, *theta)
            }
            RegularizePlan::Nash { members, nx, nv, lx, lv, exps, base } => nash(*members, *nx, *nv, *lx, *lv, *exps, *base),
        }
    }
}

fn solution(r: Rough) -> Result<PlaneWaveSolution> {
    PlaneWaveSolution::rough(r.s, r.xi_max, r.ratio).map_err(ctx("rough datum"))
}

fn exponents(r: Rough, window: (f64, f64), points: usize, herau: (f64, f64, f64), t_end: f64, hp: usize) -> Result<Outcome> {
    let sol = solution(r)?;
    let tr = sol.trajectory(&log_grid(window.0, window.1, points)).map_err(ctx("short-time trajectory"))?;
    let dv = fit_rate(&tr, "ah", FitKind::PowerLaw, window).map_err(ctx("∇_v fit"))?;
    let dx = fit_rate(&tr, "ch", FitKind::PowerLaw, window).map_err(ctx("∇_x fit"))?;
    let times: Vec<f64> = (0..hp).map(|i| i as f64 * t_end / (hp - 1) as f64).collect();
    let htr = sol.trajectory(&times).map_err(ctx("Hérau trajectory"))?;
    let h = herau_check(&htr, herau.0, herau.1, herau.2).map_err(ctx("Hérau functional"))?;
    let mut ht = Table::new("herau", &["t", "F"]);
    for (t, f) in times.iter().zip(&h.f) {
        ht.push_nums(&[*t, *f]);
    }
    let mut out = Outcome::default();
    out.tables.push(Table::from_trajectory("short_time", &tr));
    out.tables.push(ht);
    out.plots.push(Plot::new("short_time", "short-time norms", "t", &["ah", "ch"]).log(true, true));
    out.plots.push(Plot::new("herau", "time-weighted functional", "t", &["F"]));
    // Power fits act on squared norms.
    out.head("grad_v_exponent", dv.rate / 2.0);
    out.head("grad_v_r2", dv.r2);
    out.head("grad_x_exponent", dx.rate / 2.0);
    out.head("grad_x_r2", dx.r2);
    out.head("herau_max_violation", h.max_violation);
    out.head("herau_a_bound_ratio", h.a_bound_ratio);
    out.head("herau_c_bound_ratio", h.c_bound_ratio);
    let mono = h.max_violation <= 1e-10;
    out.verdict("herau_nonincreasing", mono);
    out.certified = mono;
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn diffineq(r: Rough, syn: [f64; 4], a: f64, k: f64, t0: f64, points: usize, delta: f64, theta: f64) -> Result<Outcome> {
    // Exact instance: E = X = Y = e^{−t}, Z = 1, M = 0 on (0, 1].
    let st: Vec<f64> = (1..=1000).map(|i| i as f64 * 1e-3).collect();
    let decay: Vec<f64> = st.iter().map(|t| (-t).exp()).collect();
    let exact = DiffIneqInstance {
        c: syn[0],
        k: syn[1],
        delta: syn[2],
        theta: syn[3],
        times: st.clone(),
        e: decay.clone(),
        x: decay.clone(),
        y: decay,
        z: vec![1.0; st.len()],
        m: vec![0.0; st.len()],
    };
    let ev = diffineq_check(&exact).map_err(ctx("synthetic instance"))?;

    // X = ‖∂_x h‖², Y = ‖∂_v³h‖², Z = ‖∂_v⁴h‖² + ‖∂_x∂_v h‖², M = ⟨∂_x h, ∂_v h⟩, E = X + aY.
    let times = log_grid(t0, 1.0, points);
    let tr = solution(r)?.trajectory(&times).map_err(ctx("regularization trajectory"))?;
    let col = |n: &str| tr.require(n).map(|v| v.to_vec()).map_err(ctx("regularization trajectory"));
    let (x, y, y4, w, m) = (col("ch")?, col("y3")?, col("y4")?, col("w")?, col("mixed")?);
    let z: Vec<f64> = y4.iter().zip(&w).map(|(p, q)| p + q).collect();
    let e: Vec<f64> = x.iter().zip(&y).map(|(p, q)| p + a * q).collect();
    let mut inst = DiffIneqInstance { c: 1.0, k, delta, theta, times: times.clone(), e, x, y, z, m };
    let c = inst.calibrate().map_err(ctx("calibration"))?;
    let v = diffineq_check(&inst).map_err(ctx("mapped instance"))?;
    let mut env = Table::new("envelope", &["t", "E", "bound", "X", "Y", "Z", "M"]);
    let mut violations = 0usize;
    let mut ratio = 0.0f64;
    for i in 0..times.len() {
        let bound = v.c_bar * times[i].powf(v.exponent);
        violations += usize::from(inst.e[i] > bound * (1.0 + 1e-12));
        ratio = ratio.max(inst.e[i] / bound);
        env.push_nums(&[times[i], inst.e[i], bound, inst.x[i], inst.y[i], inst.z[i], inst.m[i]]);
    }
    let mut out = Outcome::default();
    out.tables.push(env);
    out.plots.push(Plot::new("envelope", "E against C̄t^p", "t", &["E", "bound"]).log(true, true));
    out.head("synthetic_kappa", ev.kappa);
    out.head("synthetic_exponent", ev.exponent);
    out.head("synthetic_c_bar", ev.c_bar);
    out.head("mapped_c", c);
    out.head("mapped_kappa", v.kappa);
    out.head("mapped_exponent", v.exponent);
    out.head("mapped_c_bar", v.c_bar);
    out.head("envelope_violations", violations as f64);
    out.head("envelope_max_ratio", ratio);
    out.verdict("synthetic_hypotheses", ev.hypotheses_hold);
    out.verdict("mapped_hypotheses", v.hypotheses_hold);
    out.verdict("envelope_holds", violations == 0);
    out.certified = ev.hypotheses_hold && v.hypotheses_hold && violations == 0;
    Ok(out)
}

/// Anisotropic dilations `exp(−x²/2σ² − v²/2σ^{2/3})` with `σ = base^{(i − c)/3}` centred on the middle member.
fn nash(members: usize, nx: usize, nv: usize, lx: f64, lv: f64, exps: [f64; 4], base: f64) -> Result<Outcome> {
    let theta = nash_theta(1, exps).map_err(ctx("Nash exponent"))?;
    let mid = (members - 1) as f64 / 2.0;
    let mut tab = Table::new("nash", &["sigma", "lhs", "rhs_core", "ratio"]);
    let mut ratios = Vec::with_capacity(members);
    for i in 0..members {
        let sigma = base.powf((i as f64 - mid) / 3.0);
        let tau = sigma.powf(1.0 / 3.0);
        let mut f = vec![0.0; nx * nv];
        for p in 0..nx {
            let x = -lx / 2.0 + p as f64 * lx / nx as f64;
            for q in 0..nv {
                let v = -lv / 2.0 + q as f64 * lv / nv as f64;
                f[p * nv + q] = (-0.5 * (x / sigma).powi(2) - 0.5 * (v / tau).powi(2)).exp();
            }
        }
        let rec = nash_check(&f, nx, nv, lx, lv, exps).map_err(ctx("Nash check"))?;
        let r = rec.lhs / rec.rhs_core;
        ratios.push(r);
        tab.push(vec![num(sigma), num(rec.lhs), num(rec.rhs_core), num(r)]);
    }
    let max = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut out = Outcome::default();
    out.tables.push(tab);
    out.plots.push(Plot::new("nash", "lhs / rhs", "sigma", &["ratio"]).log(true, false));
    out.head("theta", theta);
    out.head("ratio_min", min);
    out.head("ratio_max", max);
    out.head("spread", max / min);
    out.verdict("bounded_ratio", min > 0.0 && max.is_finite());
    out.certified = min > 0.0 && max.is_finite();
    Ok(out)
}
