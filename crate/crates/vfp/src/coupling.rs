use std::f64::consts::PI;

use crate::{Result, VfpError};

/// `δ + δ²e^δ/2`; the coupling is small when this is below `1/2`.
pub fn smallness(delta: f64) -> f64 {
    delta + 0.5 * delta * delta * delta.exp()
}

/// Even, mean-zero interaction `W(z) = Σ_k c_k cos(2πkz/ℓ)` on a torus of length `ℓ`.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingSpec {
    pub ell: f64,
    /// `(k, c_k)` with `k ≥ 1`.
    pub modes: Vec<(usize, f64)>,
    /// `max|W|` on a 4096-point grid.
    pub delta: f64,
}

impl CouplingSpec {
    pub fn new(ell: f64, modes: Vec<(usize, f64)>) -> Result<Self> {
        if !(ell > 0.0 && ell.is_finite()) {
            return Err(VfpError::Invalid(format!("torus length {ell}")));
        }
        if modes.iter().any(|(k, c)| *k == 0 || !c.is_finite()) {
            return Err(VfpError::Invalid("coefficients must be finite with k ≥ 1 (W has zero mean)".into()));
        }
        let mut w = CouplingSpec { ell, modes, delta: 0.0 };
        w.delta = (0..4096).map(|i| w.eval(i as f64 * ell / 4096.0).abs()).fold(0.0, f64::max);
        Ok(w)
    }

    /// `W(z) = ε₀cos(2πz/ℓ)`.
    pub fn cosine(eps0: f64, ell: f64) -> Result<Self> {
        Self::new(ell, vec![(1, eps0)])
    }

    pub fn zero(ell: f64) -> Result<Self> {
        Self::new(ell, Vec::new())
    }

    fn wave(&self, k: usize) -> f64 {
        2.0 * PI * k as f64 / self.ell
    }

    pub fn eval(&self, z: f64) -> f64 {
        self.modes.iter().map(|&(k, c)| c * (self.wave(k) * z).cos()).sum()
    }

    pub fn smallness(&self) -> f64 {
        smallness(self.delta)
    }

    pub fn is_small(&self) -> bool {
        self.smallness() < 0.5
    }

    /// `Φ = W ⋆ ρ` and `F = −Φ'` at the nodes `x_i = i·dx`, from the discrete Fourier
    /// coefficients of `ρ` (exact for the trapezoidal convolution sum).
    pub fn potential_and_force(&self, rho: &[f64], dx: f64) -> (Vec<f64>, Vec<f64>) {
        let n = rho.len();
        let mut phi = vec![0.0; n];
        let mut force = vec![0.0; n];
        for &(k, c) in &self.modes {
            let q = self.wave(k);
            let (mut a, mut b) = (0.0, 0.0);
            for (i, r) in rho.iter().enumerate() {
                let (s, co) = (q * i as f64 * dx).sin_cos();
                a += r * co;
                b += r * s;
            }
            a *= dx;
            b *= dx;
            for i in 0..n {
                let (s, co) = (q * i as f64 * dx).sin_cos();
                phi[i] += c * (co * a + s * b);
                force[i] += c * q * (s * a - co * b);
            }
        }
        (phi, force)
    }
}
