use models::ModelInstance;
use spectral_core::{commutator, LinOp, C64};

use crate::{CertifyError, Result};

/// How the principal parts `C_{k+1}` of `[C_k, B]` are chosen.
#[derive(Clone, Debug)]
pub enum Principal {
    /// `C_{k+1} = [C_k, B]` for `k < Nc`; the last bracket becomes the remainder `R_{Nc+1}`.
    Exact,
    /// User-supplied `C_1…C_Nc` and remainders `R_1…R_{Nc+1}` (`None` meaning zero).
    Designated { c: Vec<LinOp>, r: Vec<Option<LinOp>> },
}

impl Principal {
    /// Kinetic designation: `C_1 = ∇_x`, `R_1 = 0`, `C_2 = 0`, `R_2 = [C_1, B] = −V''∂_v`.
    pub fn kinetic(model: &ModelInstance) -> Self {
        Principal::Designated {
            c: vec![model.grad_x.clone()],
            r: vec![None, Some(model.hess_dv.scale(C64::new(-1.0, 0.0)))],
        }
    }
}

#[derive(Clone, Debug)]
pub struct CommutatorChain {
    /// `C_0 = A, C_1, …, C_Nc`; `C_{Nc+1} = 0` is implicit.
    pub c: Vec<LinOp>,
    /// `(λ_j, Λ_j)` bounds of `Z_j`, `j = 1…Nc+1`; identity here.
    pub z: Vec<(f64, f64)>,
    /// `R_1 … R_{Nc+1}`.
    pub r: Vec<LinOp>,
    /// `‖[C_j,B] − C_{j+1} − R_{j+1}‖` on columns clear of the truncation edge.
    pub residuals: Vec<f64>,
}

impl CommutatorChain {
    pub fn levels(&self) -> usize {
        self.c.len()
    }
}

fn interior_norm(op: &LinOp, margin: usize) -> f64 {
    op.column_norm(&op.basis.interior(margin))
}

/// Builds `C_0 = A, C_k ≈ [C_{k−1}, B]` for the first `A` of the model.
pub fn commutator_chain(model: &ModelInstance, nc: usize, principal: &Principal) -> Result<CommutatorChain> {
    if nc < 1 {
        return Err(CertifyError::Invalid("chain length Nc must be ≥ 1".into()));
    }
    let zero = LinOp::zero(model.basis.clone());
    let mut c = vec![model.a[0].clone()];
    let mut r = Vec::with_capacity(nc + 1);
    match principal {
        Principal::Exact => {
            for k in 0..nc {
                let next = commutator(&c[k], &model.b)?;
                c.push(next);
                r.push(zero.clone());
            }
            r.push(commutator(&c[nc], &model.b)?);
        }
        Principal::Designated { c: cs, r: rs } => {
            if cs.len() != nc || rs.len() != nc + 1 {
                return Err(CertifyError::Invalid(format!(
                    "designation needs {nc} principal parts and {} remainders",
                    nc + 1
                )));
            }
            c.extend(cs.iter().cloned());
            r.extend(rs.iter().map(|x| x.clone().unwrap_or_else(|| zero.clone())));
        }
    }
    let margin = nc + 2;
    let mut residuals = Vec::with_capacity(nc + 1);
    for j in 0..=nc {
        let bracket = commutator(&c[j], &model.b)?;
        let next = if j < nc { &c[j + 1] } else { &zero };
        let res = interior_norm(&bracket.sub(next)?.sub(&r[j])?, margin);
        let tol = 1e-8 * bracket.norm_fro().max(1.0);
        if res > tol {
            return Err(CertifyError::ChainInvariant { level: j, residual: res });
        }
        residuals.push(res);
    }
    Ok(CommutatorChain {
        c,
        z: vec![(1.0, 1.0); nc + 1],
        r,
        residuals,
    })
}
