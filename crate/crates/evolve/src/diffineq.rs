use crate::{EvolveError, Result};

/// Sampled `E, X, Y, Z, M` on a grid in `(0, 1]` with constants `C, K` and exponents `δ, θ`.
#[derive(Clone, Debug)]
pub struct DiffIneqInstance {
    pub c: f64,
    pub k: f64,
    pub delta: f64,
    pub theta: f64,
    pub times: Vec<f64>,
    pub e: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    pub m: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct DiffIneqVerdict {
    /// Per condition: `K(X+Y) ≤ E ≤ C(X+Y)`, `|M| ≤ CE^{1−δ}`, `E' ≤ −KZ + CE`,
    /// `Y ≤ C(X+Z)^{1−θ}`, `M' ≤ −KX + C(Y+Z)`.
    pub hypotheses: [bool; 5],
    /// Smallest `rhs − lhs (+ slack)` per condition.
    pub margins: [f64; 5],
    pub hypotheses_hold: bool,
    pub kappa: f64,
    /// `−1/κ`.
    pub exponent: f64,
    /// Smallest `C̄` with `E(t_i) ≤ C̄ t_i^{−1/κ}` at every sample.
    pub c_bar: f64,
    pub holds: bool,
}

/// Forward differences and their local slack `10·dt_i·max(|f''|)` at the two ends of each step.
fn derivative_with_slack(t: &[f64], f: &[f64]) -> Vec<(f64, f64)> {
    let n = t.len();
    let second: Vec<f64> = (0..n)
        .map(|i| {
            if i == 0 || i + 1 == n {
                return 0.0;
            }
            let (h1, h2) = (t[i] - t[i - 1], t[i + 1] - t[i]);
            2.0 * ((f[i + 1] - f[i]) / h2 - (f[i] - f[i - 1]) / h1) / (h1 + h2)
        })
        .collect();
    (0..n - 1)
        .map(|i| {
            let dt = t[i + 1] - t[i];
            let curv = second[i].abs().max(second[i + 1].abs());
            ((f[i + 1] - f[i]) / dt, 10.0 * dt * curv)
        })
        .collect()
}

impl DiffIneqInstance {
    fn validate(&self) -> Result<()> {
        let n = self.times.len();
        if n < 3 {
            return Err(EvolveError::Invalid("need at least three samples".into()));
        }
        if self.times.windows(2).any(|w| w[1] <= w[0]) || self.times[0] <= 0.0 || self.times[n - 1] > 1.0 + 1e-12 {
            return Err(EvolveError::Invalid("time grid must be increasing inside (0, 1]".into()));
        }
        if [&self.e, &self.x, &self.y, &self.z, &self.m].iter().any(|v| v.len() != n) {
            return Err(EvolveError::Invalid("every function needs one sample per time".into()));
        }
        if !(self.delta > 0.0 && self.delta < 1.0 && self.theta > 0.0 && self.theta < 1.0) {
            return Err(EvolveError::Invalid("δ and θ must lie in (0, 1)".into()));
        }
        if !(self.c > 0.0 && self.k > 0.0) {
            return Err(EvolveError::Invalid("C and K must be positive".into()));
        }
        Ok(())
    }

    /// Smallest `C` for which every condition involving `C` holds at the given `K`.
    pub fn calibrate(&mut self) -> Result<f64> {
        self.c = 1.0;
        self.validate()?;
        let (k, n) = (self.k, self.times.len());
        let mut need: f64 = 0.0;
        let mut req = |num: f64, den: f64| {
            if num > 0.0 {
                need = need.max(if den > 0.0 { num / den } else { f64::INFINITY });
            }
        };
        for i in 0..n {
            req(self.e[i], self.x[i] + self.y[i]);
            req(self.m[i].abs(), self.e[i].powf(1.0 - self.delta));
            req(self.y[i], (self.x[i] + self.z[i]).powf(1.0 - self.theta));
        }
        let de = derivative_with_slack(&self.times, &self.e);
        let dm = derivative_with_slack(&self.times, &self.m);
        for i in 0..n - 1 {
            req(de[i].0 - de[i].1 + k * self.z[i], self.e[i]);
            req(dm[i].0 - dm[i].1 + k * self.x[i], self.y[i] + self.z[i]);
        }
        self.c = (need * (1.0 + 1e-9)).max(f64::MIN_POSITIVE);
        Ok(self.c)
    }
}

/// Checks the five hypotheses pointwise and evaluates the conclusion constant.
///
/// Derivatives are forward differences; conditions 3 and 5 get the additive slack of
/// [`derivative_with_slack`], the others a relative tolerance of `1e-12`.
pub fn diffineq_check(inst: &DiffIneqInstance) -> Result<DiffIneqVerdict> {
    inst.validate()?;
    let (c, k, n) = (inst.c, inst.k, inst.times.len());
    let tol = |v: f64| 1e-12 * v.abs().max(1e-300);
    let mut margins = [f64::INFINITY; 5];
    for i in 0..n {
        let (e, x, y, z, m) = (inst.e[i], inst.x[i], inst.y[i], inst.z[i], inst.m[i]);
        if [e, x, y, z].iter().any(|v| *v < 0.0) {
            return Err(EvolveError::Invalid(format!("negative sample at t = {}", inst.times[i])));
        }
        let lo = e - k * (x + y);
        let hi = c * (x + y) - e;
        margins[0] = margins[0].min(lo.min(hi) + tol(e));
        margins[1] = margins[1].min(c * e.powf(1.0 - inst.delta) - m.abs() + tol(m));
        margins[3] = margins[3].min(c * (x + z).powf(1.0 - inst.theta) - y + tol(y));
    }
    let de = derivative_with_slack(&inst.times, &inst.e);
    let dm = derivative_with_slack(&inst.times, &inst.m);
    for i in 0..n - 1 {
        margins[2] = margins[2].min(-k * inst.z[i] + c * inst.e[i] - de[i].0 + de[i].1);
        margins[4] = margins[4].min(-k * inst.x[i] + c * (inst.y[i] + inst.z[i]) - dm[i].0 + dm[i].1);
    }
    let hypotheses = margins.map(|m| m >= 0.0);
    let hypotheses_hold = hypotheses.iter().all(|h| *h);
    let kappa = inst.delta.min(inst.theta / (1.0 - inst.theta));
    let c_bar = inst
        .times
        .iter()
        .zip(&inst.e)
        .map(|(t, e)| e * t.powf(1.0 / kappa))
        .fold(0.0, f64::max);
    Ok(DiffIneqVerdict {
        hypotheses,
        margins,
        hypotheses_hold,
        kappa,
        exponent: -1.0 / kappa,
        c_bar,
        holds: hypotheses_hold && c_bar.is_finite(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(f: impl Fn(f64) -> [f64; 5], c: f64, k: f64) -> DiffIneqInstance {
        let times: Vec<f64> = (1..=1000).map(|i| i as f64 * 1e-3).collect();
        let s: Vec<[f64; 5]> = times.iter().map(|&t| f(t)).collect();
        let col = |j: usize| s.iter().map(|r| r[j]).collect();
        DiffIneqInstance { c, k, delta: 0.5, theta: 0.5, times, e: col(0), x: col(1), y: col(2), z: col(3), m: col(4) }
    }

    #[test]
    fn exact_instance_holds() {
        let inst = synthetic(|t| [(-t).exp(), (-t).exp(), (-t).exp(), 1.0, 0.0], 10.0, 0.1);
        let v = diffineq_check(&inst).unwrap();
        assert!(v.hypotheses_hold && v.holds, "{v:?}");
        assert_eq!(v.kappa, 0.5);
        assert_eq!(v.exponent, -2.0);
        assert!(v.c_bar.is_finite());
    }

    #[test]
    fn growth_without_dissipation_fails_line_three() {
        let inst = synthetic(|t| [(5.0 * t).exp(), (5.0 * t).exp(), (5.0 * t).exp(), 0.0, 0.0], 1.0, 0.1);
        let v = diffineq_check(&inst).unwrap();
        assert!(!v.hypotheses[2] && !v.hypotheses_hold);
    }

    #[test]
    fn conclusion_scales_with_the_data() {
        let base = synthetic(|t| [t.powi(-2), t.powi(-2), 0.5 * t.powi(-2), 1.0, 0.1], 5.0, 0.1);
        let c0 = diffineq_check(&base).unwrap().c_bar;
        let mut scaled = base.clone();
        for v in [&mut scaled.e, &mut scaled.x, &mut scaled.y, &mut scaled.z, &mut scaled.m] {
            v.iter_mut().for_each(|x| *x *= 4.0);
        }
        assert_eq!(diffineq_check(&scaled).unwrap().c_bar, 4.0 * c0);
    }

    #[test]
    fn calibration_makes_hypotheses_hold() {
        let mut inst = synthetic(|t| [(-t).exp(), (-t).exp(), (-t).exp(), 1.0, 0.0], 1.0, 0.1);
        let c = inst.calibrate().unwrap();
        assert!(c.is_finite());
        assert!(diffineq_check(&inst).unwrap().hypotheses_hold);
        let bad = DiffIneqInstance { times: vec![0.0, 0.5, 1.0], ..inst };
        assert!(diffineq_check(&bad).is_err());
    }
}
