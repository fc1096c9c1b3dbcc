use certify::{bound_constants, certified_rate_quadratic, commutator_chain, Principal};
use evolve::{fit_rate, propagate, FitKind, Functionals, Scheme};
use models::{build_kfp, PotentialSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spectral_core::{CVec, TwistCoeffs, C64};

use super::ctx;
use crate::config::{require, Config};
use crate::output::{Outcome, Plot, Table};
use crate::Result;

/// Linear semigroup decay against the certified rate.
#[derive(Clone, Debug)]
pub struct DecayPlan {
    pub potential: PotentialSpec,
    pub nx: usize,
    pub nv: usize,
    pub margin: usize,
    pub t_end: f64,
    pub dt: f64,
    pub h1_window: (f64, f64),
}

impl DecayPlan {
    pub fn parse(cfg: &Config) -> Result<Self> {
        let potential = match cfg.choice("model.potential", Some("quadratic"), &["quadratic", "cosine", "file"])?.as_str() {
            "quadratic" => {
                let omega = cfg.f64_or("model.omega", 1.0)?;
                require("model.omega", omega > 0.0, "ω must be positive")?;
                PotentialSpec::quadratic(omega)
            }
            "cosine" => {
                let ell = cfg.f64_or("model.ell", 2.0 * std::f64::consts::PI)?;
                require("model.ell", ell > 0.0, "torus length must be positive")?;
                PotentialSpec::cosine(cfg.f64("model.amplitude")?, ell)
            }
            _ => {
                let path = cfg.path("model.potential_file")?;
                let ell = cfg.f64("model.ell")?;
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| crate::CliError::Config { field: "model.potential_file".into(), message: e.to_string() })?;
                PotentialSpec::from_two_column(&text, ell).map_err(|e| crate::CliError::Config {
                    field: "model.potential_file".into(),
                    message: e.to_string(),
                })?
            }
        };
        let plan = DecayPlan {
            potential,
            nx: cfg.usize_or("model.nx", 24)?,
            nv: cfg.usize_or("model.nv", 24)?,
            margin: cfg.usize_or("model.margin", 3)?,
            t_end: cfg.f64_or("time.t_end", 40.0)?,
            dt: cfg.f64_or("time.dt", 0.1)?,
            h1_window: (cfg.f64_or("fit.h1_lo", 20.0)?, cfg.f64_or("fit.h1_hi", 40.0)?),
        };
        require("model.nx", plan.nx >= 8, "need at least 8 modes")?;
        require("model.nv", plan.nv >= 8, "need at least 8 modes")?;
        require("time.dt", plan.dt > 0.0, "must be positive")?;
        require("time.t_end", plan.t_end >= 10.0 * plan.dt, "needs at least ten steps")?;
        require("fit.h1_lo", 0.0 <= plan.h1_window.0 && plan.h1_window.0 < plan.h1_window.1, "window must be increasing")?;
        require("fit.h1_hi", plan.h1_window.1 <= plan.t_end, "window must end by time.t_end")?;
        Ok(plan)
    }

    pub fn execute(&self, seed: u64) -> Result<Outcome> {
        let m = build_kfp(&self.potential, self.nx, self.nv).map_err(ctx("model"))?;
        let ch = commutator_chain(&m, 1, &Principal::kinetic(&m)).map_err(ctx("commutator chain"))?;
        let k = bound_constants(&m, &ch, self.margin).map_err(ctx("bound constants"))?;
        let opt = certified_rate_quadratic(k.m(), k.kappa).map_err(ctx("rate optimizer"))?;
        let (a, b, c) = opt.abc;
        let f = Functionals { chain: ch.c.clone(), twist: Some(TwistCoeffs::abc(a, b, c)), extras: vec![] };
        let n = (self.t_end / self.dt).round() as usize;
        let times: Vec<f64> = (0..=n).map(|i| i as f64 * self.dt).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h0 = CVec::from_fn(m.basis.dim(), |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let p = propagate(&m.l, &h0, &m.kernel(), &times, Scheme::Eig, &f).map_err(ctx("propagation"))?;
        let tr = &p.trajectory;
        // Fits act on squared norms; halving gives the rate of the norm itself.
        let tw = fit_rate(tr, "twisted", FitKind::Exponential, (0.0, self.t_end)).map_err(ctx("twisted fit"))?;
        let h1 = fit_rate(tr, "h1", FitKind::Exponential, self.h1_window).map_err(ctx("H1 fit"))?;
        let tv = tr.require("twisted").map_err(ctx("trajectory"))?;
        let envelope = times
            .iter()
            .zip(tv)
            .skip(1)
            .map(|(t, v)| -(v / tv[0]).ln() / (2.0 * t))
            .fold(f64::INFINITY, f64::min);

        let mut out = Outcome::default();
        out.tables.push(Table::from_trajectory("trajectory", tr));
        out.plots.push(Plot::new("trajectory", "decay", "t", &["l2", "h1", "twisted"]).log(false, true));
        out.head("alpha", k.alpha);
        out.head("beta", k.beta);
        out.head("kappa", k.kappa);
        out.head("m", k.m());
        out.head("certified_rate", opt.rate);
        out.head("a", a);
        out.head("b", b);
        out.head("c", c);
        out.head("twisted_rate", tw.rate / 2.0);
        out.head("twisted_r2", tw.r2);
        out.head("twisted_envelope_rate", envelope);
        out.head("h1_rate", h1.rate / 2.0);
        out.head("h1_r2", h1.r2);
        out.head("kernel_component", p.kernel_component);
        out.note("scheme", format!("{:?}", p.scheme));
        let honoured = tw.rate / 2.0 >= opt.rate;
        out.verdict("certificate_honoured", honoured);
        out.certified = opt.rate > 0.0 && honoured;
        Ok(out)
    }
}
