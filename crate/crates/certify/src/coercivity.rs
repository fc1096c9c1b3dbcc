use models::ModelInstance;
use nalgebra::{Cholesky, SymmetricEigen};
use spectral_core::{twisted_gram, CMat, CVec, TwistCoeffs, C64};

use crate::{CertifyError, CommutatorChain, Result};

#[derive(Clone, Copy, Debug)]
pub struct Coercivity {
    /// Smallest `Re⟨⟨h,Lh⟩⟩ / Σ‖C_j h‖²` over modes clear of the truncation edge, kernel removed.
    pub k: f64,
    /// Smallest `Re⟨⟨h,Lh⟩⟩ / ⟨⟨h,h⟩⟩` over the whole truncated space, kernel removed.
    pub k_twisted: f64,
}

/// Orthonormal basis of `span(cols) ∩ kernel⊥` as columns.
fn complement(n: usize, cols: &[usize], kernel: &[CVec]) -> CMat {
    let m = cols.len();
    let mut proj = CMat::identity(m, m);
    let mut ks: Vec<CVec> = Vec::new();
    for k in kernel {
        let mut v = CVec::from_iterator(m, cols.iter().map(|&j| k[j]));
        for q in &ks {
            v -= q * q.dotc(&v);
        }
        let nv = v.norm();
        if nv > 1e-12 {
            v /= C64::new(nv, 0.0);
            proj -= &v * v.adjoint();
            ks.push(v);
        }
    }
    let eig = SymmetricEigen::new(proj);
    let keep: Vec<usize> = (0..m).filter(|&i| eig.eigenvalues[i] > 0.5).collect();
    let mut q = CMat::zeros(n, keep.len());
    for (c, &i) in keep.iter().enumerate() {
        for (r, &j) in cols.iter().enumerate() {
            q[(j, c)] = eig.eigenvectors[(r, i)];
        }
    }
    q
}

/// Smallest eigenvalue of the Hermitian pencil `(h, d)` with `d` positive definite.
fn pencil_min(h: &CMat, d: &CMat) -> Result<f64> {
    let chol = Cholesky::new(d.clone())
        .ok_or_else(|| CertifyError::Invalid("Σ C_j†C_j is singular off the kernel".into()))?;
    let l = chol.l();
    let linv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| CertifyError::Invalid("singular Cholesky factor".into()))?;
    let w = &linv * h * linv.adjoint();
    let w = (&w + w.adjoint()) * C64::new(0.5, 0.0);
    Ok(SymmetricEigen::new(w).eigenvalues.min())
}

/// Checks `Re⟨⟨h,Lh⟩⟩ ≥ K Σ_j ‖C_j h‖²` for the twisted norm of `ladder` on the chain.
pub fn coercivity_check(model: &ModelInstance, chain: &CommutatorChain, ladder: &TwistCoeffs) -> Result<Coercivity> {
    if ladder.a.len() != chain.c.len() || ladder.b.len() + 1 != chain.c.len() {
        return Err(CertifyError::Invalid(format!(
            "ladder has {} levels, chain has {}",
            ladder.a.len(),
            chain.c.len()
        )));
    }
    let negative = ladder.a.iter().chain(&ladder.b).any(|x| *x < 0.0);
    if let Some(k) = (0..ladder.b.len()).find(|&k| ladder.b[k].powi(2) > ladder.a[k] * ladder.a[k + 1]) {
        return Err(CertifyError::Invalid(format!("b_{k}² exceeds a_{k}·a_{}, the twisted norm is not equivalent", k + 1)));
    }
    if negative {
        return Err(CertifyError::Invalid("ladder coefficients must be nonnegative".into()));
    }
    let g = twisted_gram(&chain.c, ladder)?;
    let gl = &g.entries * &model.l.entries;
    let h = (&gl + gl.adjoint()) * C64::new(0.5, 0.0);
    let n = model.basis.dim();
    let mut d = CMat::zeros(n, n);
    for c in &chain.c {
        d += c.entries.adjoint() * &c.entries;
    }
    let kernel = model.kernel();
    let margin = chain.levels() + 2;
    let q = complement(n, &model.basis.interior(margin), &kernel);
    let qa = q.adjoint();
    let k = pencil_min(&(&qa * &h * &q), &(&qa * &d * &q))?;
    let all: Vec<usize> = (0..n).collect();
    let q = complement(n, &all, &kernel);
    let qa = q.adjoint();
    let k_twisted = pencil_min(&(&qa * &h * &q), &(&qa * &g.entries * &q))?;
    Ok(Coercivity { k, k_twisted })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{commutator_chain, part_one_ladder, Principal};
    use models::{build_kfp, PotentialSpec};
    use spectral_core::LinOp;

    #[test]
    fn quadratic_model_is_coercive_in_twisted_norm() {
        let m = build_kfp(&PotentialSpec::quadratic(1.0), 12, 12).unwrap();
        let ch = commutator_chain(&m, 1, &Principal::kinetic(&m)).unwrap();
        let ladder = part_one_ladder(0.05, 2).unwrap();
        let c = coercivity_check(&m, &ch, &ladder).unwrap();
        assert!(c.k > 0.0, "{c:?}");
    }

    #[test]
    fn coercive_case_recovers_the_gap() {
        let mut m = build_kfp(&PotentialSpec::quadratic(1.0), 8, 8).unwrap();
        let n = m.basis.dim();
        let diag = CVec::from_fn(n, |i, _| {
            let mi = m.basis.multi(i);
            C64::new(((mi[0] + mi[1]) as f64).sqrt(), 0.0)
        });
        let a = LinOp::new(m.basis.clone(), CMat::from_diagonal(&diag));
        m.b = LinOp::zero(m.basis.clone());
        m.l = a.compose(&a).unwrap();
        m.a = vec![a];
        let ch = commutator_chain(&m, 1, &Principal::Exact).unwrap();
        let ladder = TwistCoeffs { a: vec![0.01, 0.0], b: vec![0.0] };
        let c = coercivity_check(&m, &ch, &ladder).unwrap();
        // (λ + 0.01λ²)/λ is smallest at the gap λ = 1.
        assert!((c.k - 1.01).abs() < 1e-10, "{c:?}");
        assert!(c.k_twisted > 0.0);
    }

    #[test]
    fn non_equivalent_ladder_is_rejected() {
        let m = build_kfp(&PotentialSpec::quadratic(1.0), 8, 8).unwrap();
        let ch = commutator_chain(&m, 1, &Principal::kinetic(&m)).unwrap();
        assert!(coercivity_check(&m, &ch, &TwistCoeffs::abc(0.1, 0.5, 0.1)).is_err());
    }
}
