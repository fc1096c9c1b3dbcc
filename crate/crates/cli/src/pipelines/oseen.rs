use models::{build_oseen, OseenProfile};
use rayon::prelude::*;

use super::ctx;
use crate::config::{require, Config};
use crate::output::{num, Outcome, Plot, Table};
use crate::Result;

/// Smallest nonzero real part of the truncated `L_α` over a list of couplings.
#[derive(Clone, Debug)]
pub struct OseenPlan {
    pub alphas: Vec<f64>,
    pub n: usize,
    pub profile: OseenProfile,
    /// Exponent the measured values are checked against.
    pub floor: f64,
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

impl OseenPlan {
    pub fn parse(cfg: &Config) -> Result<Self> {
        let alphas = if cfg.has("oseen.alpha") {
            vec![cfg.f64("oseen.alpha")?]
        } else {
            cfg.f64_list("oseen.alphas")?
        };
        require("oseen.alphas", alphas.iter().all(|a| *a > 0.0), "couplings must be positive")?;
        let profile = match cfg.choice("oseen.profile", Some("inv_quadratic"), &["inv_quadratic", "constant"])?.as_str() {
            "inv_quadratic" => OseenProfile::InvQuadratic,
            _ => OseenProfile::Constant(cfg.f64("oseen.profile_value")?),
        };
        let n = cfg.usize_or("oseen.n", 256)?;
        require("oseen.n", n >= 32, "truncation must be at least 32")?;
        let floor = cfg.f64_or("oseen.floor_exponent", 0.25)?;
        Ok(OseenPlan { alphas, n, profile, floor })
    }

    pub fn execute(&self) -> Result<Outcome> {
        let mut alphas = self.alphas.clone();
        alphas.sort_by(|a, b| a.total_cmp(b));
        let values: Vec<f64> = alphas
            .par_iter()
            .map(|&a| {
                build_oseen(a, &self.profile, self.n)
                    .and_then(|o| o.min_nonzero_real_part())
                    .map_err(ctx(&format!("Oseen α = {a}")))
            })
            .collect::<Result<_>>()?;
        let mut tab = Table::new("spectrum", &["alpha", "min_re", "floor_ratio"]);
        let a0 = alphas[0];
        let r0 = values[0] / a0.powf(self.floor);
        let mut floor_ok = true;
        for (a, v) in alphas.iter().zip(&values) {
            let ratio = v / a.powf(self.floor) / r0;
            floor_ok &= ratio >= 1.0 - 1e-9;
            tab.push(vec![num(*a), num(*v), num(ratio)]);
        }
        let mut out = Outcome::default();
        out.tables.push(tab);
        out.plots.push(Plot::new("spectrum", "min Re λ", "alpha", &["min_re"]).log(true, true));
        if alphas.len() == 1 {
            out.head("min_re", values[0]);
        } else {
            out.head("exponent", loglog_slope(&alphas, &values));
        }
        out.head("min_re_first", values[0]);
        out.head("min_re_last", *values.last().unwrap());
        out.note("floor_reference", "min_re(α)/α^p relative to the smallest α");
        out.verdict("floor_respected", floor_ok);
        out.certified = floor_ok;
        Ok(out)
    }
}
