use crate::{CertifyError, Result};

fn positive(xs: &[f64]) -> Result<()> {
    if xs.iter().all(|x| *x > 0.0 && x.is_finite()) {
        Ok(())
    } else {
        Err(CertifyError::Invalid(format!("tensor bound arguments must be positive, got {xs:?}")))
    }
}

/// `min(κ₂/2, κ₂λ/(16Λ²), κ₁λ/2)` for `L = L₁⊗M̄ + I⊗L₂`.
///
/// `λ = ⟨k₂, M̄k₂⟩` and `Λ` must bound `‖M̄k₂‖`; an upper bound on `M̄` restricted to the kernel
/// alone does not make the first-order cross term small enough.
pub fn tensor_gap_bound(kappa1: f64, kappa2: f64, lambda: f64, cap_lambda: f64) -> Result<f64> {
    positive(&[kappa1, kappa2, lambda, cap_lambda])?;
    Ok((kappa2 / 2.0)
        .min(kappa2 * lambda / (16.0 * cap_lambda * cap_lambda))
        .min(kappa1 * lambda / 2.0))
}

/// Multiplication-operator form: `min(κ₂/2, κ₂‖m‖²_{L¹}/(16‖m‖²_{L²}), κ₁‖m‖_{L¹}/2)`.
pub fn tensor_gap_bound_multiplier(kappa1: f64, kappa2: f64, m_l1: f64, m_l2: f64) -> Result<f64> {
    positive(&[kappa1, kappa2, m_l1, m_l2])?;
    Ok((kappa2 / 2.0)
        .min(kappa2 * m_l1 * m_l1 / (16.0 * m_l2 * m_l2))
        .min(kappa1 * m_l1 / 2.0))
}
