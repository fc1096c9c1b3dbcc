use crate::{EvolveError, Result, Trajectory};

#[derive(Clone, Debug)]
pub struct HerauReport {
    /// `F(t) = ‖h‖² + at‖Ah‖² + 2bt² Re⟨Ah,Ch⟩ + ct³‖Ch‖²` at each sample.
    pub f: Vec<f64>,
    /// `max_i max(0, F(t_{i+1}) − F(t_i))`.
    pub max_violation: f64,
    /// `max_t at‖Ah‖²/F(0)`; at most 1 when the implied bound `‖Ah‖² ≤ F(0)/(at)` holds.
    pub a_bound_ratio: f64,
    /// `max_t ct³‖Ch‖²/F(0)`.
    pub c_bound_ratio: f64,
}

/// Evaluates the time-weighted functional on a trajectory carrying `l2`, `ah`, `ch`, `mixed`.
///
/// Coefficients must satisfy `0 < c ≤ b ≤ a ≤ 1` and `b² ≤ ac`; anything else is reported
/// as an error rather than adjusted.
pub fn herau_check(traj: &Trajectory, a: f64, b: f64, c: f64) -> Result<HerauReport> {
    if !(a > 0.0 && b > 0.0 && c > 0.0 && a <= 1.0 && b <= a && c <= b && b * b <= a * c) {
        return Err(EvolveError::Invalid(format!(
            "coefficients a = {a}, b = {b}, c = {c} are not admissible (need 0 < c ≤ b ≤ a ≤ 1, b² ≤ ac)"
        )));
    }
    let (l2, ah, ch, mixed) = (traj.require("l2")?, traj.require("ah")?, traj.require("ch")?, traj.require("mixed")?);
    let f: Vec<f64> = traj
        .times
        .iter()
        .enumerate()
        .map(|(i, &t)| l2[i] + a * t * ah[i] + 2.0 * b * t * t * mixed[i] + c * t.powi(3) * ch[i])
        .collect();
    let max_violation = f.windows(2).map(|w| (w[1] - w[0]).max(0.0)).fold(0.0, f64::max);
    let f0 = f[0];
    let ratio = |w: &dyn Fn(usize) -> f64| {
        if f0 > 0.0 {
            (0..f.len()).map(w).fold(0.0, f64::max) / f0
        } else {
            0.0
        }
    };
    let a_bound_ratio = ratio(&|i| a * traj.times[i] * ah[i]);
    let c_bound_ratio = ratio(&|i| c * traj.times[i].powi(3) * ch[i]);
    Ok(HerauReport { f, max_violation, a_bound_ratio, c_bound_ratio })
}
