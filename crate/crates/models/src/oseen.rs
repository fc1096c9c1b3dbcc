use std::sync::Arc;

use nalgebra::Schur;
use spectral_core::{
    make_derivation, BasisSpec, CMat, Derivation, Factor, LinOp, TensorBasis, Weight, C64,
};

use crate::{ModelError, Result};

/// Multiplier profile `f` of the Oseen model problem.
#[derive(Clone, Debug)]
pub enum OseenProfile {
    /// `f(x) = 1/(1 + x²)`.
    InvQuadratic,
    Constant(f64),
    Custom(fn(f64) -> f64),
}

impl OseenProfile {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            OseenProfile::InvQuadratic => 1.0 / (1.0 + x * x),
            OseenProfile::Constant(c) => *c,
            OseenProfile::Custom(f) => f(x),
        }
    }
}

/// `L_α = S + iαF` with `S = −∂² + x² − 1` and `F` multiplication by `f`, on `L²(R)`.
#[derive(Clone, Debug)]
pub struct OseenInstance {
    pub size: usize,
    pub alpha: f64,
    pub samples: Vec<f64>,
    pub s: LinOp,
    pub f: LinOp,
    pub l: CMat,
}

/// Fraction of top Hermite modes whose eigenvalues are left out of spectral statistics.
pub const OSEEN_TAIL: f64 = 0.1;

pub fn build_oseen(alpha: f64, profile: &OseenProfile, n: usize) -> Result<OseenInstance> {
    if n < 32 {
        return Err(ModelError::Invalid(format!("Oseen truncation N = {n} < 32")));
    }
    if !alpha.is_finite() {
        return Err(ModelError::Invalid("coupling α must be finite".into()));
    }
    // Hermite functions e^{-x²/2}H_k: the scale σ = 1/√2 makes them eigenfunctions of S.
    let spec = BasisSpec::hermite(n, 0.5f64.sqrt())
        .with_weight(Weight::Lebesgue)
        .with_quad_points(3 * n);
    let basis = Arc::new(TensorBasis::new(vec![spec])?);
    let nodes = basis.factors[0].quad().nodes.clone();
    let samples: Vec<f64> = nodes.iter().map(|&x| profile.eval(x)).collect();
    if samples.iter().any(|f| !f.is_finite()) {
        return Err(ModelError::Invalid("multiplier is not finite at the quadrature nodes".into()));
    }
    let f = make_derivation(&basis, Derivation::MultFn { factor: Factor::X, samples: samples.clone() })?;
    let scale = samples.iter().fold(0.0f64, |m, s| m.max(s.abs())).max(1.0);
    if f.truncation_defect > 1e3 * scale * (n as f64).sqrt() {
        return Err(ModelError::Invalid("multiplier is not resolved by the quadrature".into()));
    }
    // The matrix is diagonal with entries 2k in the exact Hermite basis.
    let s = LinOp::new(
        basis.clone(),
        CMat::from_fn(n, n, |i, j| if i == j { C64::new(2.0 * i as f64, 0.0) } else { C64::new(0.0, 0.0) }),
    );
    let l = &s.entries + &f.entries * C64::new(0.0, alpha);
    Ok(OseenInstance { size: n, alpha, samples, s, f, l })
}

impl OseenInstance {
    /// Eigenvalues of the truncated `L_α`, from the diagonal of a complex Schur form.
    pub fn eigenvalues(&self) -> Result<Vec<C64>> {
        let schur = Schur::try_new(self.l.clone(), 1e-14, 100_000)
            .ok_or_else(|| ModelError::Invalid("Schur iteration did not converge".into()))?;
        let (_, t) = schur.unpack();
        Ok((0..self.size).map(|i| t[(i, i)]).collect())
    }

    /// Eigenvalues whose real part stays below the first excluded tail mode `2⌈0.9N⌉`.
    pub fn resolved_eigenvalues(&self) -> Result<Vec<C64>> {
        let cut = 2.0 * ((1.0 - OSEEN_TAIL) * self.size as f64).ceil();
        Ok(self.eigenvalues()?.into_iter().filter(|z| z.re < cut).collect())
    }

    /// Smallest real part above `1e-8` among resolved eigenvalues.
    pub fn min_nonzero_real_part(&self) -> Result<f64> {
        self.resolved_eigenvalues()?
            .iter()
            .map(|z| z.re)
            .filter(|&r| r > 1e-8)
            .min_by(|a, b| a.total_cmp(b))
            .ok_or_else(|| ModelError::Invalid("no nonzero eigenvalue in the resolved range".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted_re(mut v: Vec<C64>) -> Vec<f64> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re));
        v.iter().map(|z| z.re).collect()
    }

    #[test]
    fn harmonic_spectrum_at_zero_coupling() {
        let o = build_oseen(0.0, &OseenProfile::InvQuadratic, 32).unwrap();
        let re = sorted_re(o.resolved_eigenvalues().unwrap());
        for (k, r) in re.iter().enumerate() {
            assert!((r - 2.0 * k as f64).abs() < 1e-9, "mode {k}: {r}");
        }
    }

    #[test]
    fn constant_profile_shifts_imaginary_part() {
        let o = build_oseen(3.0, &OseenProfile::Constant(2.0), 40).unwrap();
        for z in o.eigenvalues().unwrap() {
            assert!((z.im - 6.0).abs() < 1e-9);
            let k = z.re / 2.0;
            assert!((k - k.round()).abs() < 1e-9);
        }
    }

    #[test]
    fn symmetric_part_is_coupling_free() {
        let o = build_oseen(17.0, &OseenProfile::InvQuadratic, 48).unwrap();
        let sym = &o.l + o.l.adjoint();
        assert!((sym - &o.s.entries * C64::new(2.0, 0.0)).norm() < 1e-10);
        assert!(o.f.symmetry_residual(1.0) < 1e-12);
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(build_oseen(1.0, &OseenProfile::InvQuadratic, 16).is_err());
        assert!(build_oseen(f64::NAN, &OseenProfile::InvQuadratic, 64).is_err());
        assert!(build_oseen(1.0, &OseenProfile::Custom(|x| (x * x * x * x).exp()), 64).is_err());
    }
}
