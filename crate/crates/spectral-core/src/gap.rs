use nalgebra::SymmetricEigen;

use crate::{frob, CMat, CVec, LinOp, Result, SpectralError, Symmetry, C64};

/// Above this dimension the gap is found by shifted inverse iteration.
pub const DENSE_LIMIT: usize = 4000;

fn kernel_projector(n: usize, kernel: &[CVec]) -> CMat {
    let mut p = CMat::zeros(n, n);
    for k in kernel {
        p += k * k.adjoint();
    }
    p
}

/// Smallest eigenvalue of a symmetric nonnegative operator on the orthogonal
/// complement of `kernel` (an orthonormal family).
pub fn spectral_gap(p: &LinOp, kernel: &[CVec]) -> Result<f64> {
    spectral_gap_with_limit(p, kernel, DENSE_LIMIT)
}

pub fn spectral_gap_with_limit(p: &LinOp, kernel: &[CVec], dense_limit: usize) -> Result<f64> {
    if p.flag != Symmetry::Symmetric {
        return Err(SpectralError::NotSymmetric);
    }
    let n = p.dim();
    if kernel.iter().any(|k| k.len() != n) {
        return Err(SpectralError::DimensionMismatch("kernel vectors".into()));
    }
    let pk = kernel_projector(n, kernel);
    let q = CMat::identity(n, n) - &pk;
    let compressed = &q * &p.entries * &q;
    // Kernel directions are lifted above the spectrum so they never win the minimum.
    let lift = 2.0 * frob(&p.entries) + 1.0;
    let shifted = &compressed + &pk * C64::new(lift, 0.0);
    let shifted = (&shifted + shifted.adjoint()) * C64::new(0.5, 0.0);
    let min = if n <= dense_limit {
        SymmetricEigen::new(shifted).eigenvalues.min()
    } else {
        inverse_iteration(&shifted)?
    };
    if min < -1e-8 {
        return Err(SpectralError::NegativeEigenvalue(min));
    }
    Ok(min.max(0.0))
}

/// Smallest eigenvalue of a Hermitian matrix by inverse iteration with a Rayleigh quotient.
fn inverse_iteration(m: &CMat) -> Result<f64> {
    let n = m.nrows();
    // A small negative shift keeps the factorised matrix nonsingular for PSD input.
    let sigma = -1e-6 * (frob(m) / (n as f64).sqrt()).max(1.0);
    let lu = (m - CMat::identity(n, n) * C64::new(sigma, 0.0)).lu();
    let mut x = CVec::from_fn(n, |i, _| C64::new(1.0 + ((i * 7919) % 13) as f64 * 0.1, 0.0));
    x /= C64::new(x.norm(), 0.0);
    let mut rq = f64::INFINITY;
    for _ in 0..2000 {
        let mut y = lu
            .solve(&x)
            .ok_or_else(|| SpectralError::Numerical("singular shifted matrix".into()))?;
        let nrm = y.norm();
        y /= C64::new(nrm, 0.0);
        let next = y.dotc(&(m * &y)).re;
        x = y;
        if (next - rq).abs() <= 1e-13 * next.abs().max(1.0) {
            return Ok(next);
        }
        rq = next;
    }
    Ok(rq)
}

/// Least `α` with `‖Sh‖² ≤ α² Σ_i ‖T_i h‖²`.
///
/// This is the quadratic-sum convention; since `(Σ‖T_i h‖)² ≥ Σ‖T_i h‖²` it is also a valid
/// (possibly pessimistic, by at most `√k`) constant for `‖Sh‖ ≤ α Σ‖T_i h‖`. `S` may itself
/// be an array, read with the array norm `‖Sh‖² = Σ‖S_j h‖²`.
#[derive(Clone, Debug)]
pub struct RelativeBound {
    pub alpha: f64,
    /// Lower bound for the sum-of-norms constant: `alpha / √k`.
    pub alpha_sum_lower: f64,
    /// `S` does not vanish on `∩ Ker T_i`; `alpha` is then infinite.
    pub unbounded: bool,
    pub convention: &'static str,
}

pub fn relative_bound_constant(s: &[LinOp], t: &[LinOp]) -> Result<RelativeBound> {
    if s.is_empty() || t.is_empty() {
        return Err(SpectralError::InvalidParameter("empty operator list".into()));
    }
    let n = s[0].dim();
    if s.iter().chain(t).any(|o| o.dim() != n) {
        return Err(SpectralError::DimensionMismatch("relative bound operands".into()));
    }
    let mut g = CMat::zeros(n, n);
    for op in t {
        g += op.entries.adjoint() * &op.entries;
    }
    let gnorm = frob(&g);
    if gnorm == 0.0 {
        return Err(SpectralError::AllZero);
    }
    let mut ss = CMat::zeros(n, n);
    for op in s {
        ss += op.entries.adjoint() * &op.entries;
    }
    let eig = SymmetricEigen::new((&g + g.adjoint()) * C64::new(0.5, 0.0));
    let tol = 1e-12 * gnorm;
    let range: Vec<usize> = (0..n).filter(|&i| eig.eigenvalues[i] > tol).collect();
    let null: Vec<usize> = (0..n).filter(|&i| eig.eigenvalues[i] <= tol).collect();
    let ssnorm = frob(&ss).max(1.0);
    let leaks = null.iter().any(|&i| {
        let u = eig.eigenvectors.column(i).into_owned();
        u.dotc(&(&ss * &u)).re > 1e-10 * ssnorm
    });
    let k = t.len() as f64;
    if leaks {
        return Ok(RelativeBound {
            alpha: f64::INFINITY,
            alpha_sum_lower: f64::INFINITY,
            unbounded: true,
            convention: "quadratic-sum",
        });
    }
    let r = range.len();
    let scaled = CMat::from_fn(n, r, |row, c| {
        let i = range[c];
        eig.eigenvectors[(row, i)] / C64::new(eig.eigenvalues[i].sqrt(), 0.0)
    });
    let pencil = scaled.adjoint() * &ss * &scaled;
    let pencil = (&pencil + pencil.adjoint()) * C64::new(0.5, 0.0);
    let top = SymmetricEigen::new(pencil).eigenvalues.max().max(0.0);
    let alpha = top.sqrt();
    Ok(RelativeBound {
        alpha,
        alpha_sum_lower: alpha / k.sqrt(),
        unbounded: false,
        convention: "quadratic-sum",
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{adjoint_weighted, make_derivation, BasisSpec, Derivation, TensorBasis};
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn unit(n: usize, i: usize) -> CVec {
        let mut e = CVec::zeros(n);
        e[i] = C64::new(1.0, 0.0);
        e
    }

    #[test]
    fn explicit_diagonal_gap() {
        let b = Arc::new(TensorBasis::new(vec![BasisSpec::hermite(3, 1.0)]).unwrap());
        let d = CMat::from_diagonal(&CVec::from_vec(vec![C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(3.0, 0.0)]));
        let p = LinOp::new(b, d);
        let gap = spectral_gap(&p, &[unit(3, 0), unit(3, 1)]).unwrap();
        assert!((gap - 3.0).abs() < 1e-12);
    }

    #[test]
    fn torus_laplacian_gap() {
        let b = Arc::new(TensorBasis::new(vec![BasisSpec::fourier(9, 2.0 * PI)]).unwrap());
        let dx = make_derivation(&b, Derivation::Dx).unwrap();
        let lap = adjoint_weighted(&dx).compose(&dx).unwrap();
        let gap = spectral_gap(&lap, &[unit(9, 4)]).unwrap();
        assert!((gap - 1.0).abs() < 1e-12);
    }

    #[test]
    fn oscillator_gap_and_iterative_agreement() {
        let h = BasisSpec::hermite(20, 1.0);
        let b = Arc::new(TensorBasis::new(vec![h.clone(), h]).unwrap());
        let dv = make_derivation(&b, Derivation::Dv).unwrap();
        let dx = make_derivation(&b, Derivation::Dx).unwrap();
        let p = adjoint_weighted(&dv).compose(&dv).unwrap().add(&adjoint_weighted(&dx).compose(&dx).unwrap()).unwrap();
        let k = [unit(400, 0)];
        let dense = spectral_gap(&p, &k).unwrap();
        assert!((dense - 1.0).abs() < 1e-10);
        let iter = spectral_gap_with_limit(&p, &k, 10).unwrap();
        assert!((iter - 1.0).abs() < 1e-6);
    }

    #[test]
    fn non_symmetric_and_negative_are_errors() {
        let b = Arc::new(TensorBasis::new(vec![BasisSpec::hermite(4, 1.0)]).unwrap());
        let dv = make_derivation(&b, Derivation::Dv).unwrap();
        assert!(matches!(spectral_gap(&dv, &[]), Err(SpectralError::NotSymmetric)));
        let neg = LinOp::new(b, CMat::identity(4, 4) * C64::new(-1.0, 0.0));
        assert!(matches!(spectral_gap(&neg, &[]), Err(SpectralError::NegativeEigenvalue(_))));
    }

    #[test]
    fn relative_bounds() {
        let h = BasisSpec::hermite(8, 1.0);
        let b = Arc::new(TensorBasis::new(vec![h.clone(), h]).unwrap());
        let dv = make_derivation(&b, Derivation::Dv).unwrap();
        let dx = make_derivation(&b, Derivation::Dx).unwrap();
        let same = relative_bound_constant(&[dv.clone()], &[dv.clone()]).unwrap();
        assert!((same.alpha - 1.0).abs() < 1e-10);
        let twice = relative_bound_constant(&[dv.scale(C64::new(2.0, 0.0))], &[dv.clone()]).unwrap();
        assert!((twice.alpha - 2.0).abs() < 1e-10);
        let escape = relative_bound_constant(&[dx.clone()], &[dv.clone()]).unwrap();
        assert!(escape.unbounded);
        let pair = relative_bound_constant(&[dv.clone()], &[dv.clone(), dx]).unwrap();
        assert!((pair.alpha - 1.0).abs() < 1e-10);
        assert!(matches!(relative_bound_constant(&[dv.clone()], &[LinOp::zero(dv.basis.clone())]), Err(SpectralError::AllZero)));
    }
}
