use evolve::{fit_rate, FitKind};
use vfp::{vfp_convergence, VfpSpec};

use super::ctx;
use crate::config::{require, Config};
use crate::output::{num, Outcome, Plot, Table};
use crate::Result;

#[derive(Clone, Debug)]
pub struct VfpPlan {
    pub spec: VfpSpec,
    pub window: (f64, f64),
}

impl VfpPlan {
    pub fn parse(cfg: &Config) -> Result<Self> {
        let spec = VfpSpec {
            nx: cfg.usize_or("grid.nx", 128)?,
            nv: cfg.usize_or("grid.nv", 129)?,
            v_max: cfg.f64_or("grid.v_max", 6.0)?,
            ell: cfg.f64_or("coupling.ell", 2.0 * std::f64::consts::PI)?,
            eps0: cfg.f64("coupling.eps0")?,
            eta: cfg.f64_or("initial.eta", 0.3)?,
            u: cfg.f64_or("initial.u", 0.3)?,
            t_end: cfg.f64_or("time.t_end", 10.0)?,
            sample_every: cfg.f64_or("time.sample_every", 0.05)?,
            schedule_k: cfg.f64_or("schedule.k_in", 1.0)?,
            schedule_exp: cfg.f64_or("schedule.k", 1.0)?,
            eps: cfg.f64_or("schedule.eps", 0.1)?,
        };
        let window = (cfg.f64_or("fit.lo", 2.0)?, cfg.f64_or("fit.hi", 10.0)?);
        require("grid.nx", spec.nx >= 8, "need at least 8 cells")?;
        require("grid.nv", spec.nv >= 9, "need at least 9 velocity nodes")?;
        require("grid.v_max", spec.v_max > 0.0, "must be positive")?;
        require("coupling.ell", spec.ell > 0.0, "must be positive")?;
        require("initial.eta", spec.eta.abs() < 1.0, "must lie in (−1, 1)")?;
        require("time.sample_every", spec.sample_every > 0.0 && spec.sample_every <= spec.t_end, "need 0 < sample_every ≤ t_end")?;
        require("schedule.k_in", spec.schedule_k > 0.0, "must be positive")?;
        require("schedule.k", spec.schedule_exp > 0.0, "must be positive")?;
        require("schedule.eps", spec.eps > 0.0 && spec.eps <= 1.0, "must lie in (0, 1]")?;
        require("fit.lo", 0.0 <= window.0 && window.0 < window.1 && window.1 <= spec.t_end, "need 0 ≤ lo < hi ≤ t_end")?;
        Ok(VfpPlan { spec, window })
    }

    pub fn execute(&self) -> Result<Outcome> {
        let run = vfp_convergence(&self.spec).map_err(ctx("VFP run"))?;
        let fit = fit_rate(&run.trajectory, "l1_distance", FitKind::Exponential, self.window).map_err(ctx("L1 fit"))?;
        let mut rb = Table::new(
            "rebrackets",
            &["t", "old_bracket", "new_bracket", "l_before", "l_after", "e_rel", "a1_after", "lower_margin", "upper_margin", "sandwich"],
        );
        for r in &run.rebrackets {
            rb.push(vec![
                num(r.t),
                num(r.old_bracket),
                num(r.new_bracket),
                num(r.before.l),
                num(r.after.l),
                num(r.after.e_rel),
                num(r.after.a1),
                num(r.after.lower_margin),
                num(r.after.upper_margin),
                r.after.sandwich_holds.to_string(),
            ]);
        }
        let max_jump = run.rebrackets.iter().map(|r| r.jump()).fold(0.0, f64::max);
        let mut out = Outcome::default();
        out.tables.push(Table::from_trajectory("trajectory", &run.trajectory));
        out.tables.push(rb);
        out.plots.push(Plot::new("trajectory", "VFP convergence", "t", &["free_energy", "lyapunov", "l1_distance"]).log(false, true));
        out.head("smallness", run.smallness);
        out.head("max_energy_increase", run.max_energy_increase);
        out.head("max_mass_drift", run.max_mass_drift);
        out.head("min_value", run.min_value);
        out.head("l1_rate", fit.rate);
        out.head("l1_r2", fit.r2);
        out.head("rebrackets", run.rebrackets.len() as f64);
        out.head("max_rebracket_jump", max_jump);
        out.head("dissipation_constant", run.dissipation_constant);
        out.head("dt", run.dt);
        out.head("steps", run.steps as f64);
        out.note("inner_product", "flat L2 product of grid values");
        out.note("force", "frozen within each split step");
        let small = run.smallness < 0.5;
        out.verdict("smallness", small);
        out.verdict("sandwich_all", run.sandwich_all);
        out.verdict("energy_nonincreasing", run.max_energy_increase <= 1e-9);
        out.certified = small && run.sandwich_all;
        Ok(out)
    }
}
