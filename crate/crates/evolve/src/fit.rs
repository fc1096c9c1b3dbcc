use crate::{EvolveError, Result, Trajectory};

/// Fits with a coefficient of determination below this are flagged unreliable.
pub const R2_RELIABLE: f64 = 0.98;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FitKind {
    /// `v ≈ C e^{-λt}`; `rate` is `λ`.
    Exponential,
    /// `v ≈ C t^p`; `rate` is `p`.
    PowerLaw,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayFit {
    pub kind: FitKind,
    pub rate: f64,
    pub prefactor: f64,
    pub window: (f64, f64),
    pub r2: f64,
    pub points: usize,
}

impl DecayFit {
    pub fn reliable(&self) -> bool {
        self.r2 >= R2_RELIABLE
    }
}

/// Least squares of `ln v` against `t` or `ln t` over samples with `t ∈ [t₀, t₁]`.
pub fn fit_rate(traj: &Trajectory, functional: &str, kind: FitKind, window: (f64, f64)) -> Result<DecayFit> {
    let v = traj.require(functional)?;
    let (t0, t1) = window;
    if !(t0 < t1) {
        return Err(EvolveError::Invalid(format!("empty fit window [{t0}, {t1}]")));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&t, &y) in traj.times.iter().zip(v) {
        if t < t0 || t > t1 {
            continue;
        }
        if !(y > 0.0) {
            return Err(EvolveError::NonPositive { name: functional.to_string(), t, value: y });
        }
        let x = match kind {
            FitKind::Exponential => t,
            FitKind::PowerLaw if t > 0.0 => t.ln(),
            FitKind::PowerLaw => return Err(EvolveError::Invalid("power-law window must exclude t = 0".into())),
        };
        xs.push(x);
        ys.push(y.ln());
    }
    if xs.len() < 2 {
        return Err(EvolveError::Invalid(format!("fewer than two samples of `{functional}` in the window")));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let r2 = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    let rate = match kind {
        FitKind::Exponential => -slope,
        FitKind::PowerLaw => slope,
    };
    Ok(DecayFit { kind, rate, prefactor: intercept.exp(), window, r2, points: xs.len() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(f: impl Fn(f64) -> f64, times: Vec<f64>) -> Trajectory {
        let v = times.iter().map(|&t| f(t)).collect();
        let mut tr = Trajectory::new(times).unwrap();
        tr.insert("v", v).unwrap();
        tr
    }

    #[test]
    fn exact_synthetic_series() {
        let tr = series(|t| 3.0 * (-0.5 * t).exp(), (0..50).map(|i| i as f64 * 0.2).collect());
        let f = fit_rate(&tr, "v", FitKind::Exponential, (0.0, 10.0)).unwrap();
        assert!((f.rate - 0.5).abs() < 1e-6 && (f.prefactor - 3.0).abs() < 1e-9 && f.reliable());
        let tr = series(|t| t.powi(-3), (1..50).map(|i| i as f64 * 0.1).collect());
        let f = fit_rate(&tr, "v", FitKind::PowerLaw, (0.1, 5.0)).unwrap();
        assert!((f.rate + 3.0).abs() < 1e-6);
    }

    #[test]
    fn nonpositive_values_are_rejected() {
        let tr = series(|t| 1.0 - t, vec![0.0, 0.5, 1.0]);
        assert!(matches!(fit_rate(&tr, "v", FitKind::Exponential, (0.0, 1.0)), Err(EvolveError::NonPositive { .. })));
        assert!(fit_rate(&tr, "w", FitKind::Exponential, (0.0, 1.0)).is_err());
    }
}
