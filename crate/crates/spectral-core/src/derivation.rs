use std::f64::consts::PI;
use std::sync::Arc;

use crate::{
    BasisKind, BasisSpec, CMat, Factor, LinOp, Result, SpectralError, TensorBasis, Weight, C64,
};

/// Elementary operators acting on one factor of a phase-space basis.
#[derive(Clone, Debug)]
pub enum Derivation {
    Dv,
    Dx,
    MultV,
    MultX,
    /// Multiplication by a function sampled at the quadrature nodes of the chosen factor.
    MultFn { factor: Factor, samples: Vec<f64> },
}

/// Hermite lowering matrix: `a e_k = √k e_{k-1}`.
pub fn lowering(n: usize) -> CMat {
    CMat::from_fn(n, n, |i, j| {
        if j == i + 1 {
            C64::new((j as f64).sqrt(), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// Matrix of `f` in the factor basis, with the norm of what leaks past the truncation.
pub fn multiplication_1d(spec: &BasisSpec, samples: &[f64]) -> Result<(CMat, f64)> {
    let q = spec.quad();
    if samples.len() != q.nodes.len() {
        return Err(SpectralError::InvalidParameter(format!(
            "{} samples for {} quadrature nodes",
            samples.len(),
            q.nodes.len()
        )));
    }
    if samples.iter().any(|s| !s.is_finite()) {
        return Err(SpectralError::Numerical("non-finite multiplier sample".into()));
    }
    let phi = &q.values;
    let weighted = CMat::from_fn(phi.nrows(), phi.ncols(), |r, c| phi[(r, c)] * samples[r]);
    let m = phi.adjoint() * &weighted;
    // Component of f ψ_k orthogonal to the retained span, measured by quadrature.
    let residual = &weighted - phi * &m;
    Ok((m, crate::frob(&residual)))
}

fn derivative_1d(spec: &BasisSpec) -> Result<(CMat, f64)> {
    let n = spec.size;
    match spec.kind {
        BasisKind::HermiteGauss => {
            let a = lowering(n);
            let s = spec.scale;
            match spec.weight {
                Weight::Gaussian => Ok((a / C64::new(s, 0.0), 0.0)),
                Weight::Lebesgue => {
                    let d = (&a - a.adjoint()) / C64::new(2.0 * s, 0.0);
                    Ok((d, (n as f64).sqrt() / (2.0 * s)))
                }
                _ => unreachable!("validated in build_basis"),
            }
        }
        BasisKind::FourierTorus => {
            let ks = spec.wave_numbers();
            let ell = spec.scale;
            let mut d = CMat::from_fn(n, n, |i, j| {
                if i == j {
                    C64::new(0.0, 2.0 * PI * ks[i] as f64 / ell)
                } else {
                    C64::new(0.0, 0.0)
                }
            });
            let mut defect = 0.0;
            if let Weight::Gibbs { grad, .. } = &spec.weight {
                let half: Vec<f64> = grad.iter().map(|g| 0.5 * g).collect();
                let (m, leak) = multiplication_1d(spec, &half)?;
                d += m;
                defect = leak;
            }
            Ok((d, defect))
        }
    }
}

fn position_1d(spec: &BasisSpec) -> Result<(CMat, f64)> {
    match spec.kind {
        BasisKind::HermiteGauss => {
            let a = lowering(spec.size);
            let x = (&a + a.adjoint()) * C64::new(spec.scale, 0.0);
            Ok((x, spec.scale * (spec.size as f64).sqrt()))
        }
        BasisKind::FourierTorus => Err(SpectralError::Unsupported(
            "multiplication by the coordinate on a torus factor".into(),
        )),
    }
}

/// Lifts a one-factor matrix to the whole tensor basis.
pub fn lift(basis: &TensorBasis, factor: usize, m: &CMat) -> CMat {
    let mut out = CMat::identity(1, 1);
    for (k, f) in basis.factors.iter().enumerate() {
        let piece = if k == factor { m.clone() } else { CMat::identity(f.size, f.size) };
        out = out.kronecker(&piece);
    }
    out
}

/// Matrix of an elementary operator in the orthonormal tensor basis.
pub fn make_derivation(basis: &Arc<TensorBasis>, which: Derivation) -> Result<LinOp> {
    let (role, (m, leak)) = match &which {
        Derivation::Dx => {
            let k = basis.factor_index(Factor::X);
            (k, derivative_1d(&basis.factors[k])?)
        }
        Derivation::Dv => {
            let k = basis.factor_index(Factor::V);
            if basis.factors[k].kind == BasisKind::FourierTorus {
                return Err(SpectralError::Unsupported("∂_v on a torus factor".into()));
            }
            (k, derivative_1d(&basis.factors[k])?)
        }
        Derivation::MultX => {
            let k = basis.factor_index(Factor::X);
            (k, position_1d(&basis.factors[k])?)
        }
        Derivation::MultV => {
            let k = basis.factor_index(Factor::V);
            (k, position_1d(&basis.factors[k])?)
        }
        Derivation::MultFn { factor, samples } => {
            let k = basis.factor_index(*factor);
            (k, multiplication_1d(&basis.factors[k], samples)?)
        }
    };
    let others: usize = basis.dim() / basis.factors[role].size;
    Ok(LinOp::with_defect(
        basis.clone(),
        lift(basis, role, &m),
        leak * (others as f64).sqrt(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{adjoint_weighted, commutator, Symmetry};

    fn single(spec: BasisSpec) -> Arc<TensorBasis> {
        Arc::new(TensorBasis::new(vec![spec]).unwrap())
    }

    fn diag_close(m: &CMat, d: &[C64], tol: f64) -> bool {
        (0..m.nrows()).all(|i| {
            (0..m.ncols()).all(|j| {
                let want = if i == j { d[i] } else { C64::new(0.0, 0.0) };
                (m[(i, j)] - want).norm() < tol
            })
        })
    }

    #[test]
    fn number_operator_spectrum() {
        let b = single(BasisSpec::hermite(4, 1.0));
        let dv = make_derivation(&b, Derivation::Dv).unwrap();
        let n = adjoint_weighted(&dv).compose(&dv).unwrap();
        let want: Vec<C64> = (0..4).map(|k| C64::new(k as f64, 0.0)).collect();
        assert!(diag_close(&n.entries, &want, 1e-14));
    }

    #[test]
    fn fourier_symbol() {
        let b = single(BasisSpec::fourier(5, 2.0 * PI));
        let dx = make_derivation(&b, Derivation::Dx).unwrap();
        let want: Vec<C64> = (-2..=2).map(|k| C64::new(0.0, k as f64)).collect();
        assert!(diag_close(&dx.entries, &want, 1e-14));
        assert_eq!(dx.flag, Symmetry::Antisymmetric);
        let adj = adjoint_weighted(&dx);
        assert!((adj.entries + dx.entries).norm() < 1e-14);
    }

    #[test]
    fn constant_multiplier_is_identity() {
        for spec in [BasisSpec::hermite(9, 1.3), BasisSpec::fourier(7, 3.0)] {
            let b = single(spec);
            let nq = b.factors[0].quad().nodes.len();
            let m = make_derivation(&b, Derivation::MultFn { factor: Factor::V, samples: vec![1.0; nq] }).unwrap();
            let ones = vec![C64::new(1.0, 0.0); m.dim()];
            assert!(diag_close(&m.entries, &ones, 1e-12));
            assert!(m.truncation_defect < 1e-10);
        }
    }

    #[test]
    fn lowering_and_position_commute_to_identity() {
        let b = single(BasisSpec::hermite(10, 1.0));
        let dv = make_derivation(&b, Derivation::Dv).unwrap();
        let v = make_derivation(&b, Derivation::MultV).unwrap();
        let c = commutator(&dv, &v).unwrap();
        for i in 0..9 {
            for j in 0..10 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((c.entries[(i, j)] - C64::new(want, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn quadrature_position_matches_ladder() {
        let b = single(BasisSpec::hermite(8, 0.7));
        let nodes = b.factors[0].quad().nodes.clone();
        let by_quad = make_derivation(&b, Derivation::MultFn { factor: Factor::X, samples: nodes }).unwrap();
        let by_ladder = make_derivation(&b, Derivation::MultX).unwrap();
        assert!((by_quad.entries - by_ladder.entries).norm() < 1e-12);
        assert!((by_quad.truncation_defect - by_ladder.truncation_defect).abs() < 1e-10);
    }

    #[test]
    fn torus_position_is_unsupported() {
        let b = single(BasisSpec::fourier(5, 1.0));
        assert!(matches!(make_derivation(&b, Derivation::MultV), Err(SpectralError::Unsupported(_))));
    }

    #[test]
    fn lebesgue_derivative_is_antisymmetric() {
        let b = single(BasisSpec::hermite(12, 0.5f64.sqrt()).with_weight(Weight::Lebesgue));
        let d = make_derivation(&b, Derivation::Dx).unwrap();
        assert_eq!(d.flag, Symmetry::Antisymmetric);
        // −∂² + x² has spectrum 2k + 1 away from the truncation edge.
        let x = make_derivation(&b, Derivation::MultX).unwrap();
        let h = d.compose(&d).unwrap().scale(C64::new(-1.0, 0.0)).add(&x.compose(&x).unwrap()).unwrap();
        for k in 0..10 {
            assert!((h.entries[(k, k)].re - (2 * k + 1) as f64).abs() < 1e-12);
        }
    }
}
