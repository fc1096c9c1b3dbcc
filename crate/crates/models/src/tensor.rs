use std::sync::Arc;

use nalgebra::SymmetricEigen;
use spectral_core::{
    derivation::multiplication_1d, CMat, CVec, LinOp, Symmetry, TensorBasis, C64,
};

use crate::{ModelError, Result};

/// `L = P₁ ⊗ M̄ + I ⊗ P₂` together with the multiplier data entering the gap bounds.
#[derive(Clone, Debug)]
pub struct TensorToy {
    pub l: LinOp,
    /// `k₁ ⊗ k₂`, the kernel of `L`.
    pub kernel: CVec,
    pub kappa1: f64,
    pub kappa2: f64,
    /// `⟨k₂, M̄ k₂⟩`.
    pub lambda: f64,
    /// `‖M̄ k₂‖`, the quantity the tensorization argument actually bounds.
    pub cap_lambda: f64,
    pub m_l1: f64,
    pub m_l2: f64,
}

/// Kernel vector and gap of a symmetric PSD matrix with a one-dimensional kernel.
fn kernel_and_gap(p: &LinOp, which: &str) -> Result<(CVec, f64)> {
    if p.flag != Symmetry::Symmetric {
        return Err(ModelError::Invalid(format!("{which} is not symmetric")));
    }
    let eig = SymmetricEigen::new(p.entries.clone());
    let mut order: Vec<usize> = (0..p.dim()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let scale = p.norm_fro().max(1.0);
    let (e0, e1) = (eig.eigenvalues[order[0]], eig.eigenvalues[order[1]]);
    if e0.abs() > 1e-10 * scale || e1 <= 1e-10 * scale {
        return Err(ModelError::Invalid(format!(
            "{which} must be PSD with a one-dimensional kernel (lowest eigenvalues {e0:e}, {e1:e})"
        )));
    }
    Ok((eig.eigenvectors.column(order[0]).into_owned(), e1))
}

/// Assembles the tensor toy; `m` is sampled at the quadrature nodes of `P₂`'s factor.
pub fn build_tensor_toy(p1: &LinOp, p2: &LinOp, m: &[f64]) -> Result<TensorToy> {
    if p1.basis.factors.len() != 1 || p2.basis.factors.len() != 1 {
        return Err(ModelError::Invalid("tensor toy factors must be one-dimensional".into()));
    }
    if m.iter().any(|x| !x.is_finite() || *x < -1e-14) {
        return Err(ModelError::Invalid("multiplier must be finite and nonnegative".into()));
    }
    if m.iter().all(|x| *x == 0.0) {
        return Err(ModelError::Invalid("multiplier vanishes identically".into()));
    }
    let (k1, kappa1) = kernel_and_gap(p1, "P1")?;
    let (k2, kappa2) = kernel_and_gap(p2, "P2")?;
    let f2 = &p2.basis.factors[0];
    let (mbar, _) = multiplication_1d(f2, m)?;
    let w = &f2.quad().weights;
    let m_l1: f64 = m.iter().zip(w).map(|(x, w)| x.abs() * w).sum();
    let m_l2: f64 = m.iter().zip(w).map(|(x, w)| x * x * w).sum::<f64>().sqrt();
    let mk = &mbar * &k2;
    let lambda = k2.dotc(&mk).re;
    let cap_lambda = mk.norm();
    let basis = Arc::new(TensorBasis::new(vec![p1.basis.factors[0].clone(), f2.clone()])?);
    let n2 = f2.size;
    let entries = p1.entries.kronecker(&mbar) + CMat::identity(p1.dim(), p1.dim()).kronecker(&p2.entries);
    let l = LinOp::new(basis, (&entries + entries.adjoint()) * C64::new(0.5, 0.0));
    debug_assert_eq!(l.dim(), p1.dim() * n2);
    Ok(TensorToy {
        l,
        kernel: k1.kronecker(&k2),
        kappa1,
        kappa2,
        lambda,
        cap_lambda,
        m_l1,
        m_l2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use spectral_core::{adjoint_weighted, make_derivation, spectral_gap, BasisSpec, Derivation};

    fn oscillator(n: usize) -> LinOp {
        let b = Arc::new(TensorBasis::new(vec![BasisSpec::hermite(n, 1.0)]).unwrap());
        let d = make_derivation(&b, Derivation::Dv).unwrap();
        adjoint_weighted(&d).compose(&d).unwrap()
    }

    #[test]
    fn unit_multiplier_gives_tensor_sum() {
        let p1 = oscillator(6);
        let p2 = oscillator(7).scale(C64::new(0.3, 0.0));
        let nq = p2.basis.factors[0].quad().nodes.len();
        let toy = build_tensor_toy(&p1, &p2, &vec![1.0; nq]).unwrap();
        let gap = spectral_gap(&toy.l, &[toy.kernel.clone()]).unwrap();
        assert!((gap - 0.3).abs() < 1e-10);
        assert!((toy.lambda - 1.0).abs() < 1e-12 && (toy.cap_lambda - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_example_is_coercive() {
        // −(x²∂_y*∂_y + ∂_x*∂_x) on the Gaussian plane.
        let p = oscillator(14);
        let nodes = p.basis.factors[0].quad().nodes.clone();
        let m: Vec<f64> = nodes.iter().map(|x| x * x).collect();
        let toy = build_tensor_toy(&p, &p, &m).unwrap();
        assert!((toy.m_l1 - 1.0).abs() < 1e-12);
        assert!((toy.m_l2 - 3f64.sqrt()).abs() < 1e-12);
        let gap = spectral_gap(&toy.l, &[toy.kernel.clone()]).unwrap();
        assert!(gap > 1.0 / 48.0, "gap {gap}");
    }

    #[test]
    fn zero_multiplier_is_rejected() {
        let p = oscillator(5);
        let nq = p.basis.factors[0].quad().nodes.len();
        assert!(build_tensor_toy(&p, &p, &vec![0.0; nq]).is_err());
        let two_kernel = LinOp::zero(p.basis.clone());
        assert!(build_tensor_toy(&two_kernel, &p, &vec![1.0; nq]).is_err());
    }
}
