use certify::NonlinearLadder;

use crate::{free_energy, CouplingSpec, Result, VfpError, VfpState};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LyapunovReport {
    /// `L(f) = [E(f) − E(f_∞)] + a₁⟨(I−Π₁)f, (I−Π₁)'_f·(Bf)⟩`.
    pub l: f64,
    /// `E(f) − E(f_∞)`.
    pub e_rel: f64,
    pub correction: f64,
    pub a1: f64,
    /// The bracket value `E`.
    pub bracket: f64,
    /// `E/2 ≤ E(f) − E(f_∞) ≤ E`.
    pub in_bracket: bool,
    /// `L − E/4`.
    pub lower_margin: f64,
    /// `5E/4 − L`.
    pub upper_margin: f64,
    pub sandwich_holds: bool,
}

/// `L(f)` for a given `a₁` and bracket `E`. `⟨·,·⟩` is the flat `L²` product of grid values;
/// `Bf = v∂_x f + F[f]∂_v f` by centered differences.
pub fn lyapunov_with(state: &VfpState, w: &CouplingSpec, a1: f64, bracket: f64) -> Result<LyapunovReport> {
    if !(a1 >= 0.0 && a1.is_finite() && bracket > 0.0) {
        return Err(VfpError::Invalid(format!("need a₁ ≥ 0 and E > 0, got {a1}, {bracket}")));
    }
    let e_rel = free_energy(state, w)?.relative();
    let f = &state.f;
    let (nx, nv, dx, dv) = (f.nx, f.nv, f.dx(), f.dv());
    let rho = f.density();
    let (_, force) = w.potential_and_force(&rho, dx);
    let zm: f64 = (0..nv).map(|j| (-0.5 * f.v(j).powi(2)).exp()).sum::<f64>() * dv;
    let m: Vec<f64> = (0..nv).map(|j| (-0.5 * f.v(j).powi(2)).exp() / zm).collect();
    let mut correction = 0.0;
    let mut bf = vec![0.0; nv];
    for i in 0..nx {
        let (ip, im) = ((i + 1) % nx, (i + nx - 1) % nx);
        for j in 0..nv {
            let fx = (f.at(ip, j) - f.at(im, j)) / (2.0 * dx);
            let fv = if j == 0 {
                (f.at(i, 1) - f.at(i, 0)) / dv
            } else if j + 1 == nv {
                (f.at(i, j) - f.at(i, j - 1)) / dv
            } else {
                (f.at(i, j + 1) - f.at(i, j - 1)) / (2.0 * dv)
            };
            bf[j] = f.v(j) * fx + force[i] * fv;
        }
        let bavg = bf.iter().sum::<f64>() * dv;
        for j in 0..nv {
            correction += (f.at(i, j) - rho[i] * m[j]) * (bf[j] - bavg * m[j]);
        }
    }
    correction *= a1 * f.weight();
    let l = e_rel + correction;
    let lower_margin = l - bracket / 4.0;
    let upper_margin = 1.25 * bracket - l;
    Ok(LyapunovReport {
        l,
        e_rel,
        correction,
        a1,
        bracket,
        in_bracket: e_rel >= 0.5 * bracket && e_rel <= bracket,
        lower_margin,
        upper_margin,
        sandwich_holds: lower_margin >= 0.0 && upper_margin >= 0.0,
    })
}

/// `L(f)` with `a₁` from a `J = 2` schedule built for the bracket `schedule.e`.
pub fn nonlinear_lyapunov(state: &VfpState, w: &CouplingSpec, schedule: &NonlinearLadder) -> Result<LyapunovReport> {
    if schedule.a.len() != 1 {
        return Err(VfpError::Schedule(format!("expected a J = 2 schedule, got {} coefficients", schedule.a.len())));
    }
    if !schedule.feasible {
        return Err(VfpError::Schedule(format!("schedule infeasible, margins {:?}", schedule.margins)));
    }
    let a1 = schedule.a[0];
    let cap = schedule.k_used * schedule.e.powf(schedule.eps);
    if a1 > cap * (1.0 + 1e-12) {
        return Err(VfpError::Schedule(format!("a₁ = {a1:e} exceeds K·E^ε = {cap:e}")));
    }
    lyapunov_with(state, w, a1, schedule.e)
}
