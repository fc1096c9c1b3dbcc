use rustfft::{num_complex::Complex64, FftPlanner};

use crate::{EvolveError, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NashRecord {
    /// `∫|D_x^λ D_v^μ f|²`.
    pub lhs: f64,
    /// `(∫|D_x^{λ'}f|² + ∫|D_v^{μ'}f|²)^{1−θ} (∫f)^{2θ}`.
    pub rhs_core: f64,
    pub theta: f64,
    pub mass: f64,
}

/// `θ = [1 − (λ/λ' + μ/μ')] / [1 + (n/2)(1/λ' + 1/μ')]`.
pub fn nash_theta(n: usize, exps: [f64; 4]) -> Result<f64> {
    let [l, m, lp, mp] = exps;
    if !(lp > 0.0 && mp > 0.0 && l >= 0.0 && m >= 0.0) || l / lp + m / mp >= 1.0 {
        return Err(EvolveError::Invalid(format!("exponents {exps:?} violate λ/λ' + μ/μ' < 1")));
    }
    Ok((1.0 - (l / lp + m / mp)) / (1.0 + 0.5 * n as f64 * (1.0 / lp + 1.0 / mp)))
}

fn wave_numbers(n: usize, len: f64) -> Vec<f64> {
    (0..n)
        .map(|k| {
            let k = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
            2.0 * std::f64::consts::PI * k / len
        })
        .collect()
}

fn symbol(k: f64, p: f64) -> f64 {
    if p == 0.0 {
        1.0
    } else {
        k.abs().powf(2.0 * p)
    }
}

/// Evaluates both sides of the Nash-type inequality (one space and one velocity dimension)
/// for samples `f[i·nv + j] = f(x_i, v_j)` on a periodic box `lx × lv`.
pub fn nash_check(f: &[f64], nx: usize, nv: usize, lx: f64, lv: f64, exps: [f64; 4]) -> Result<NashRecord> {
    let theta = nash_theta(1, exps)?;
    if !nx.is_power_of_two() || !nv.is_power_of_two() || f.len() != nx * nv {
        return Err(EvolveError::Invalid("grid sizes must be powers of two matching the samples".into()));
    }
    if let Some(v) = f.iter().find(|v| **v < -1e-12 || !v.is_finite()) {
        return Err(EvolveError::Invalid(format!("f must be nonnegative, found {v:e}")));
    }
    let (dx, dv) = (lx / nx as f64, lv / nv as f64);
    let mass = f.iter().sum::<f64>() * dx * dv;
    let mut planner = FftPlanner::<f64>::new();
    let mut buf: Vec<Complex64> = f.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let fv = planner.plan_fft_forward(nv);
    for row in buf.chunks_mut(nv) {
        fv.process(row);
    }
    let fx = planner.plan_fft_forward(nx);
    let mut col = vec![Complex64::new(0.0, 0.0); nx];
    for j in 0..nv {
        for i in 0..nx {
            col[i] = buf[i * nv + j];
        }
        fx.process(&mut col);
        for i in 0..nx {
            buf[i * nv + j] = col[i];
        }
    }
    let (kx, kv) = (wave_numbers(nx, lx), wave_numbers(nv, lv));
    // Parseval: ∫|g|² ≈ dx·dv/(nx·nv) Σ|ĝ|².
    let norm = dx * dv / (nx * nv) as f64;
    let [l, m, lp, mp] = exps;
    let (mut lhs, mut sx, mut sv) = (0.0, 0.0, 0.0);
    for i in 0..nx {
        for j in 0..nv {
            let p = buf[i * nv + j].norm_sqr() * norm;
            lhs += symbol(kx[i], l) * symbol(kv[j], m) * p;
            sx += symbol(kx[i], lp) * p;
            sv += symbol(kv[j], mp) * p;
        }
    }
    let rhs_core = (sx + sv).powf(1.0 - theta) * mass.max(0.0).powf(2.0 * theta);
    Ok(NashRecord { lhs, rhs_core, theta, mass })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theta_worked_value() {
        assert!((nash_theta(1, [0.0, 1.0, 1.0, 3.0]).unwrap() - 0.4).abs() < 1e-15);
        assert!(nash_theta(1, [1.0, 1.0, 1.0, 3.0]).is_err());
    }

    #[test]
    fn zero_function() {
        let r = nash_check(&[0.0; 64], 8, 8, 1.0, 1.0, [0.0, 1.0, 1.0, 3.0]).unwrap();
        assert_eq!((r.lhs, r.rhs_core), (0.0, 0.0));
        assert!(nash_check(&[-1.0; 64], 8, 8, 1.0, 1.0, [0.0, 1.0, 1.0, 3.0]).is_err());
    }

    #[test]
    fn single_mode_derivative() {
        // f = 1 + cos(v) on [0, 2π)²: ∫|∂_v f|² = ∫ sin² = 2π².
        let n = 16;
        let h = 2.0 * std::f64::consts::PI / n as f64;
        let f: Vec<f64> = (0..n * n).map(|k| 1.0 + ((k % n) as f64 * h).cos()).collect();
        let tau = 2.0 * std::f64::consts::PI;
        let r = nash_check(&f, n, n, tau, tau, [0.0, 1.0, 1.0, 3.0]).unwrap();
        let pi2 = std::f64::consts::PI.powi(2);
        assert!((r.lhs - 2.0 * pi2).abs() < 1e-10);
        assert!((r.mass - tau * tau).abs() < 1e-10);
    }
}
