use entropic::{entropy_decay, DecayRun, DecaySpec, InitialDatum, Ladder};
use evolve::{fit_rate, DecayFit, FitKind};

use super::ctx;
use crate::config::{require, Config};
use crate::output::{Outcome, Plot, Table};
use crate::Result;

/// Discrete Fokker–Planck decay, optionally repeated on the grid refined twice.
#[derive(Clone, Debug)]
pub struct EntropyPlan {
    pub spec: DecaySpec,
    pub window: (f64, f64),
    pub refine: bool,
}

impl EntropyPlan {
    pub fn parse(cfg: &Config) -> Result<Self> {
        let initial = match cfg.choice("initial.kind", Some("smooth"), &["smooth", "rough"])?.as_str() {
            "smooth" => InitialDatum::Smooth {
                modulation: cfg.f64_or("initial.modulation", 0.5)?,
                shift: cfg.f64_or("initial.shift", 1.0)?,
            },
            _ => InitialDatum::Rough { jump: cfg.f64_or("initial.jump", 0.5)? },
        };
        let spec = DecaySpec {
            nx: cfg.usize_or("grid.nx", 128)?,
            nv: cfg.usize_or("grid.nv", 129)?,
            v_max: cfg.f64_or("grid.v_max", 6.0)?,
            amplitude: cfg.f64_or("potential.amplitude", 1.0)?,
            ell: cfg.f64_or("potential.ell", 2.0 * std::f64::consts::PI)?,
            t_end: cfg.f64_or("time.t_end", 5.0)?,
            sample_every: cfg.f64_or("time.sample_every", 0.05)?,
            ladder: Ladder::new(cfg.f64_or("ladder.a0", 0.1)?, cfg.f64_or("ladder.b0", 0.05)?, cfg.f64_or("ladder.a1", 0.05)?),
            initial,
        };
        let window = (cfg.f64_or("fit.lo", 1.0)?, cfg.f64_or("fit.hi", 5.0)?);
        let refine = cfg.bool_or("refine", false)?;
        require("grid.nx", spec.nx >= 8, "need at least 8 cells")?;
        require("grid.nv", spec.nv >= 9, "need at least 9 velocity nodes")?;
        require("grid.v_max", spec.v_max > 0.0, "must be positive")?;
        require("potential.ell", spec.ell > 0.0, "must be positive")?;
        require("time.sample_every", spec.sample_every > 0.0 && spec.sample_every <= spec.t_end, "need 0 < sample_every ≤ t_end")?;
        require("ladder.b0", spec.ladder.validate(1.0).is_ok(), "ladder must satisfy b0² ≤ a0·a1 with nonnegative entries")?;
        require("fit.lo", 0.0 <= window.0 && window.0 < window.1 && window.1 <= spec.t_end, "need 0 ≤ lo < hi ≤ t_end")?;
        if let InitialDatum::Smooth { modulation, .. } = spec.initial {
            require("initial.modulation", modulation.abs() < 1.0, "must lie in (−1, 1)")?;
        }
        if let InitialDatum::Rough { jump } = spec.initial {
            require("initial.jump", jump.abs() < 1.0, "must lie in (−1, 1)")?;
        }
        Ok(EntropyPlan { spec, window, refine })
    }

    pub fn execute(&self) -> Result<Outcome> {
        let run = |spec: &DecaySpec| -> Result<(DecayRun, DecayFit)> {
            let r = entropy_decay(spec).map_err(ctx("entropy decay"))?;
            let f = fit_rate(&r.trajectory, "energy", FitKind::Exponential, self.window).map_err(ctx("energy fit"))?;
            Ok((r, f))
        };
        let fine = DecaySpec { nx: 2 * self.spec.nx, nv: 2 * self.spec.nv - 1, ..self.spec.clone() };
        let (base, refined) = if self.refine {
            let (a, b) = rayon::join(|| run(&self.spec), || run(&fine));
            (a?, Some(b?))
        } else {
            (run(&self.spec)?, None)
        };
        let (r, fit) = base;
        let mut out = Outcome::default();
        out.tables.push(Table::from_trajectory("trajectory", &r.trajectory));
        out.plots.push(Plot::new("trajectory", "entropy decay", "t", &["entropy", "energy"]).log(false, true));
        out.head("rate", fit.rate);
        out.head("r2", fit.r2);
        out.head("dt", r.dt);
        out.head("steps", r.steps as f64);
        out.head("max_entropy_increase", r.max_entropy_increase);
        out.head("max_mass_drift", r.max_mass_drift);
        out.head("min_value", r.min_value);
        let h_ok = r.max_entropy_increase <= 1e-10;
        let mut ok = h_ok;
        if let Some((rf, ff)) = refined {
            out.tables.push(Table::from_trajectory("refined", &rf.trajectory));
            out.head("refined_rate", ff.rate);
            out.head("refined_r2", ff.r2);
            out.head("refined_max_entropy_increase", rf.max_entropy_increase);
            out.head("rate_ratio", ff.rate / fit.rate);
            ok &= rf.max_entropy_increase <= 1e-10;
        }
        out.verdict("h_theorem", ok);
        out.certified = ok;
        Ok(out)
    }
}
