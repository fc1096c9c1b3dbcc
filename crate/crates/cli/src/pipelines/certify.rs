use certify::{
    aab_matrix, certificate_matrix_aab, certified_rate_quadratic, eps_extended, explicit_objective, ladder_geometric,
    ladder_nonlinear, sb_matrix, scaled_min_eig, validate_geometric, BoundConstants,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ctx;
use crate::config::{require, Config};
use crate::output::{num, Outcome, Plot, Table};
use crate::Result;

#[derive(Clone, Debug)]
pub enum CertifyPlan {
    Rate { m: f64, kappa: f64, point: Option<(f64, f64, f64)> },
    Matrices { samples: usize, alpha_max: f64, beta_max: f64, m_max: f64, aab_factor: f64, sb_factor: f64 },
    Ladders { samples: usize, n_max: usize, grid: LadderGrid, worked: (f64, f64, f64, f64, usize, f64) },
}

#[derive(Clone, Debug)]
pub struct LadderGrid {
    pub k_in: Vec<f64>,
    pub e_bar: Vec<f64>,
    pub k: Vec<f64>,
    pub j: Vec<usize>,
    /// `ε = frac·ε_ext(J)`, the range on which the extended chain meets every line.
    pub eps_frac: Vec<f64>,
    /// `E = ratio·Ē`.
    pub e_ratio: f64,
}

impl CertifyPlan {
    pub fn parse(cfg: &Config) -> Result<Self> {
        match cfg.choice("certify.task", None, &["rate", "matrices", "ladders"])?.as_str() {
            "rate" => {
                let m = cfg.f64("model.m")?;
                let kappa = cfg.f64("model.kappa")?;
                require("model.m", m >= 0.0, "M must be nonnegative")?;
                require("model.kappa", kappa > 0.0, "κ must be positive")?;
                let point = if cfg.has("certify.point.a") || cfg.has("certify.point.b") || cfg.has("certify.point.c") {
                    Some((cfg.f64("certify.point.a")?, cfg.f64("certify.point.b")?, cfg.f64("certify.point.c")?))
                } else {
                    None
                };
                Ok(CertifyPlan::Rate { m, kappa, point })
            }
            "matrices" => {
                let plan = CertifyPlan::Matrices {
                    samples: cfg.usize_or("certify.samples", 1000)?,
                    alpha_max: cfg.f64_or("certify.alpha_max", 3.0)?,
                    beta_max: cfg.f64_or("certify.beta_max", 3.0)?,
                    m_max: cfg.f64_or("certify.m_max", 3.0)?,
                    aab_factor: cfg.f64_or("certify.aab_factor", 32.0)?,
                    sb_factor: cfg.f64_or("certify.sb_factor", 64.0)?,
                };
                if let CertifyPlan::Matrices { samples, alpha_max, beta_max, m_max, aab_factor, sb_factor } = &plan {
                    require("certify.samples", *samples >= 1, "need at least one sample")?;
                    require("certify.alpha_max", *alpha_max >= 0.0, "must be nonnegative")?;
                    require("certify.beta_max", *beta_max >= 0.0, "must be nonnegative")?;
                    require("certify.m_max", *m_max >= 1.0, "must be at least 1")?;
                    require("certify.aab_factor", *aab_factor > 1.0, "must exceed 1")?;
                    require("certify.sb_factor", *sb_factor > 1.0, "must exceed 1")?;
                }
                Ok(plan)
            }
            _ => {
                let grid = LadderGrid {
                    k_in: cfg.f64_list_or("ladder.grid.k_in", &[0.5, 2.0])?,
                    e_bar: cfg.f64_list_or("ladder.grid.e_bar", &[0.5, 4.0])?,
                    k: cfg.f64_list_or("ladder.grid.k", &[0.5, 1.0, 2.0, 4.0, 8.0])?,
                    j: cfg.usize_list_or("ladder.grid.j", &[2, 3, 4, 5, 6])?,
                    eps_frac: cfg.f64_list_or("ladder.grid.eps_frac", &[0.5])?,
                    e_ratio: cfg.f64_or("ladder.grid.e_ratio", 0.5)?,
                };
                require("ladder.grid.k_in", grid.k_in.iter().all(|x| *x > 0.0), "entries must be positive")?;
                require("ladder.grid.e_bar", grid.e_bar.iter().all(|x| *x > 0.0), "entries must be positive")?;
                require("ladder.grid.k", grid.k.iter().all(|x| *x > 0.0), "entries must be positive")?;
                require("ladder.grid.j", grid.j.iter().all(|x| (2..=40).contains(x)), "entries must lie in 2..=40")?;
                require("ladder.grid.eps_frac", grid.eps_frac.iter().all(|x| *x > 0.0 && *x <= 1.0), "entries must lie in (0, 1]")?;
                require("ladder.grid.e_ratio", grid.e_ratio > 0.0 && grid.e_ratio <= 1.0, "must lie in (0, 1]")?;
                let worked = (
                    cfg.f64_or("ladder.worked.k_in", 0.5)?,
                    cfg.f64_or("ladder.worked.e_bar", 1.0)?,
                    cfg.f64_or("ladder.worked.e", 1.0)?,
                    cfg.f64_or("ladder.worked.k", 1.0)?,
                    cfg.usize_or("ladder.worked.j", 3)?,
                    cfg.f64_or("ladder.worked.eps", 0.1)?,
                );
                let samples = cfg.usize_or("ladder.samples", 200)?;
                let n_max = cfg.usize_or("ladder.n_max", 12)?;
                require("ladder.n_max", (1..=40).contains(&n_max), "must lie in 1..=40")?;
                Ok(CertifyPlan::Ladders { samples, n_max, grid, worked })
            }
        }
    }

    pub fn execute(&self, seed: u64) -> Result<Outcome> {
        match self {
            CertifyPlan::Rate { m, kappa, point } => rate(*m, *kappa, *point),
            CertifyPlan::Matrices { samples, alpha_max, beta_max, m_max, aab_factor, sb_factor } => {
                matrices(seed, *samples, *alpha_max, *beta_max, *m_max, *aab_factor, *sb_factor)
            }
            CertifyPlan::Ladders { samples, n_max, grid, worked } => ladders(seed, *samples, *n_max, grid, *worked),
        }
    }
}

fn rate(m: f64, kappa: f64, point: Option<(f64, f64, f64)>) -> Result<Outcome> {
    let opt = certified_rate_quadratic(m, kappa).map_err(ctx("rate optimizer"))?;
    let mut out = Outcome::default();
    let mut trace = Table::new("trace", &["eval", "a", "b", "c", "objective"]);
    for (i, r) in opt.trace.iter().enumerate() {
        trace.push(vec![i.to_string(), num(r[0]), num(r[1]), num(r[2]), num(r[3])]);
    }
    out.tables.push(trace);
    out.plots.push(Plot::new("trace", "optimizer trace", "eval", &["objective"]));
    let (a, b, c) = opt.abc;
    out.head("rate", opt.rate);
    out.head("a", a);
    out.head("b", b);
    out.head("c", c);
    if let Some((pa, pb, pc)) = point {
        let v = explicit_objective(m, kappa, pa, pb, pc);
        out.head("point_objective", v);
        out.verdict("optimum_beats_point", opt.rate >= v);
    }
    // The key=value certificate of the 4×4 matrix at the optimizing triple, with α = β = M.
    let rep = certificate_matrix_aab(&BoundConstants::new(m, m, kappa).map_err(ctx("bound constants"))?, a, b, c)
        .map_err(ctx("certificate matrix"))?;
    out.texts.push(("certificate.txt".into(), rep.to_record()));
    out.verdict("rate_positive", opt.rate > 0.0);
    out.certified = opt.rate > 0.0;
    Ok(out)
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..=hi.ln())).exp()
}

/// `1, a, b, c` with `u_{k+1} ≤ δu_k` and `u_k² ≤ δu_{k−1}u_{k+1}`, drawn log-uniformly.
fn geometric_triple(rng: &mut ChaCha8Rng, d: f64) -> (f64, f64, f64) {
    let a = log_uniform(rng, d.powi(4), d.powi(3));
    let b = log_uniform(rng, a * a / d, d * d * a);
    let c = log_uniform(rng, b * b / (d * a), d * b);
    (a, b, c)
}

/// `a ≤ r`, `b ≤ ra`, `c ≤ rb`, `a ≤ r√b`, `b ≤ r√(ac)`, drawn log-uniformly.
fn separated_triple(rng: &mut ChaCha8Rng, r: f64) -> (f64, f64, f64) {
    let a = log_uniform(rng, r.powi(6), r.powi(5));
    let b = log_uniform(rng, a * a / (r * r), r.powi(3) * a);
    let c = log_uniform(rng, b * b / (r * r * a), r * b);
    (a, b, c)
}

fn matrices(seed: u64, samples: usize, alpha_max: f64, beta_max: f64, m_max: f64, fa: f64, fs: f64) -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tab = Table::new("matrices", &["kind", "sample", "alpha", "beta", "m", "delta", "a", "b", "c", "min_eig", "scaled_min_eig"]);
    let (mut aab_fail, mut sb_fail) = (0usize, 0usize);
    let mut worst = [f64::INFINITY; 2];
    for i in 0..samples {
        let alpha = rng.gen_range(0.0..=alpha_max);
        let beta = rng.gen_range(0.0..=beta_max);
        let m = 1f64.max(alpha).max(beta);
        let d = 1.0 / (fa * m * m);
        let (a, b, c) = geometric_triple(&mut rng, d);
        let mat = aab_matrix(alpha, beta, a, b, c);
        let raw = certify::symmetric_min_eig(&mat);
        let s = scaled_min_eig(&mat);
        aab_fail += usize::from(!(s > 0.0));
        worst[0] = worst[0].min(s);
        tab.push(vec!["aab".into(), i.to_string(), num(alpha), num(beta), num(m), num(d), num(a), num(b), num(c), num(raw), num(s)]);
    }
    for i in 0..samples {
        let m = rng.gen_range(1.0..=m_max);
        let r = 1.0 / (fs * m * m);
        let (a, b, c) = separated_triple(&mut rng, r);
        let mat = sb_matrix(m, a, b, c);
        let raw = certify::symmetric_min_eig(&mat);
        let s = scaled_min_eig(&mat);
        sb_fail += usize::from(!(s > 0.0));
        worst[1] = worst[1].min(s);
        tab.push(vec!["sb".into(), i.to_string(), num(m), num(m), num(m), num(r), num(a), num(b), num(c), num(raw), num(s)]);
    }
    let mut out = Outcome::default();
    out.tables.push(tab);
    out.head("samples", samples as f64);
    out.head("aab_failures", aab_fail as f64);
    out.head("sb_failures", sb_fail as f64);
    out.head("aab_worst_scaled_min_eig", worst[0]);
    out.head("sb_worst_scaled_min_eig", worst[1]);
    out.verdict("aab_all_definite", aab_fail == 0);
    out.verdict("sb_all_definite", sb_fail == 0);
    out.note("definiteness", "smallest eigenvalue after unit-diagonal congruence scaling");
    out.certified = aab_fail == 0 && sb_fail == 0;
    Ok(out)
}

fn ladders(seed: u64, samples: usize, n_max: usize, g: &LadderGrid, worked: (f64, f64, f64, f64, usize, f64)) -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut geo = Table::new("geometric", &["sample", "delta", "n", "k", "log_u"]);
    let mut geo_fail = 0usize;
    for s in 0..samples {
        let delta = rng.gen_range(0.01..0.9);
        let n = rng.gen_range(1..=n_max);
        let l = ladder_geometric(delta, n).map_err(ctx("geometric ladder"))?;
        geo_fail += usize::from(!validate_geometric(&l.log_u, delta));
        for (k, lu) in l.log_u.iter().enumerate() {
            geo.push(vec![s.to_string(), num(delta), n.to_string(), k.to_string(), num(*lu)]);
        }
    }

    let mut nl = Table::new(
        "nonlinear",
        &["point", "k_in", "e_bar", "e", "k", "j", "eps", "path", "k_used", "k1", "ell", "feasible", "a"],
    );
    let (mut points, mut infeasible) = (0usize, 0usize);
    for &k_in in &g.k_in {
        for &e_bar in &g.e_bar {
            for &k in &g.k {
                for &j in &g.j {
                    for &frac in &g.eps_frac {
                        let eps = frac * eps_extended(j);
                        let e = g.e_ratio * e_bar;
                        let s = ladder_nonlinear(k_in, e_bar, e, k, j, eps).map_err(ctx("nonlinear ladder"))?;
                        infeasible += usize::from(!s.feasible);
                        let a: Vec<String> = s.a.iter().map(|x| num(*x)).collect();
                        nl.push(vec![
                            points.to_string(),
                            num(k_in),
                            num(e_bar),
                            num(e),
                            num(k),
                            j.to_string(),
                            num(eps),
                            format!("{:?}", s.path),
                            num(s.k_used),
                            num(s.k1),
                            num(s.ell),
                            s.feasible.to_string(),
                            a.join(";"),
                        ]);
                        points += 1;
                    }
                }
            }
        }
    }
    let (wk, wbar, we, wkk, wj, weps) = worked;
    let w = ladder_nonlinear(wk, wbar, we, wkk, wj, weps).map_err(ctx("worked schedule"))?;
    let mut out = Outcome::default();
    out.tables.push(geo);
    out.tables.push(nl);
    out.head("geometric_samples", samples as f64);
    out.head("geometric_failures", geo_fail as f64);
    out.head("nonlinear_points", points as f64);
    out.head("nonlinear_infeasible", infeasible as f64);
    out.head("worked_a1", w.closed_form[0]);
    out.head("worked_target", w.k_used * we.powf(weps));
    out.verdict("geometric_valid", geo_fail == 0);
    out.verdict("nonlinear_feasible", infeasible == 0);
    out.certified = geo_fail == 0 && infeasible == 0;
    Ok(out)
}
