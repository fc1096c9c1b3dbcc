use std::sync::Arc;

use spectral_core::{
    adjoint_weighted, commutator, make_derivation, BasisSpec, CMat, CVec, Derivation, Factor,
    LinOp, StateVector, Symmetry, TensorBasis, Weight, C64,
};

use crate::{ModelError, PotentialKind, PotentialSpec, Result};

/// Assembled operator `L = Σ A_i†A_i + B` (or `S + B`) with its equilibrium.
#[derive(Clone, Debug)]
pub struct ModelInstance {
    pub name: String,
    pub basis: Arc<TensorBasis>,
    pub a: Vec<LinOp>,
    pub b: LinOp,
    pub s: Option<LinOp>,
    pub l: LinOp,
    /// Unit vector spanning the kernel; it represents `h = 1`, i.e. the unit-mass equilibrium.
    pub equilibrium: StateVector,
    pub kernel_projector: LinOp,
    /// `∇_x` in the weighted space of the model.
    pub grad_x: LinOp,
    /// `V''(x) ∂_v`.
    pub hess_dv: LinOp,
    /// Largest entry of `[A,B] − ∇_x` on columns two steps inside the truncation.
    pub commutator_residual: f64,
    pub potential: Option<PotentialSpec>,
}

impl ModelInstance {
    /// Symmetric part of `L`: `Σ A_i†A_i` or `S`.
    pub fn symmetric_part(&self) -> LinOp {
        match &self.s {
            Some(s) => s.clone(),
            None => sum_aa(&self.a).expect("A operators share a basis"),
        }
    }

    pub fn kernel(&self) -> Vec<CVec> {
        vec![self.equilibrium.coeffs.clone()]
    }

    /// `Re⟨Lh,h⟩` predicted by the dissipation identity: `‖Ah‖²` or `⟨Sh,h⟩`.
    pub fn dissipation(&self, h: &CVec) -> f64 {
        match &self.s {
            Some(s) => h.dotc(&s.apply(h)).re,
            None => self.a.iter().map(|a| a.apply(h).norm_squared()).sum(),
        }
    }

    /// Removes the kernel component of `h`.
    pub fn project_out_kernel(&self, h: &CVec) -> CVec {
        let e = &self.equilibrium.coeffs;
        h - e * e.dotc(h)
    }
}

fn sum_aa(a: &[LinOp]) -> spectral_core::Result<LinOp> {
    let mut out = LinOp::zero(a[0].basis.clone());
    for op in a {
        out = out.add(&adjoint_weighted(op).compose(op)?)?;
    }
    Ok(out)
}

fn interior_residual(diff: &LinOp, margin: usize) -> f64 {
    let cols = diff.basis.interior(margin);
    cols.iter()
        .flat_map(|&j| diff.entries.column(j).iter().map(|z| z.norm()).collect::<Vec<_>>())
        .fold(0.0, f64::max)
}

fn finish(
    name: String,
    basis: Arc<TensorBasis>,
    a: Vec<LinOp>,
    b: LinOp,
    s: Option<LinOp>,
    eq: CVec,
    grad_x: LinOp,
    hess_dv: LinOp,
    potential: Option<PotentialSpec>,
) -> Result<ModelInstance> {
    let l = match &s {
        Some(s) => s.add(&b)?,
        None => sum_aa(&a)?.add(&b)?,
    };
    let c = commutator(&a[0], &b)?;
    let commutator_residual = interior_residual(&c.sub(&grad_x)?, 2);
    let equilibrium = StateVector::new(basis.clone(), eq)?;
    let e = &equilibrium.coeffs;
    let kernel_projector = LinOp::new(basis.clone(), e * e.adjoint());
    Ok(ModelInstance {
        name,
        basis,
        a,
        b,
        s,
        l,
        equilibrium,
        kernel_projector,
        grad_x,
        hess_dv,
        commutator_residual,
        potential,
    })
}

/// Antisymmetric part of `raw`, carrying both the removed part and the inherited defect.
fn antisymmetric(raw: LinOp) -> LinOp {
    let mut anti = raw.antisymmetrized();
    anti.truncation_defect += raw.truncation_defect;
    anti
}

/// Kinetic Fokker–Planck operator `L = ∂_v*∂_v + v∂_x − V'(x)∂_v` in `L²(e^{-V}dx ⊗ γ)`.
///
/// A quadratic potential uses Hermite functions in both variables, so that
/// `B = √ω(a_v†a_x − a_x†a_v)` exactly. A periodic potential uses Fourier modes in `x`
/// through the ground-state map of the Gibbs weight.
pub fn build_kfp(potential: &PotentialSpec, nx: usize, nv: usize) -> Result<ModelInstance> {
    if nx < 4 || nv < 4 {
        return Err(ModelError::Invalid(format!("need Nx, Nv ≥ 4, got {nx}×{nv}")));
    }
    let vspec = BasisSpec::hermite(nv, 1.0);
    match &potential.kind {
        PotentialKind::Quadratic { omega } => {
            if !(*omega > 0.0) {
                return Err(ModelError::Invalid("quadratic potential needs ω > 0".into()));
            }
            let basis = Arc::new(TensorBasis::new(vec![BasisSpec::hermite(nx, 1.0 / omega.sqrt()), vspec])?);
            let dv = make_derivation(&basis, Derivation::Dv)?;
            let dx = make_derivation(&basis, Derivation::Dx)?;
            let x = make_derivation(&basis, Derivation::MultX)?;
            let v = make_derivation(&basis, Derivation::MultV)?;
            let w = C64::new(*omega, 0.0);
            let b = antisymmetric(v.compose(&dx)?.sub(&x.compose(&dv)?.scale(w))?);
            let mut eq = CVec::zeros(basis.dim());
            eq[0] = C64::new(1.0, 0.0);
            let hess_dv = dv.scale(w);
            finish(
                format!("kfp-quadratic(omega={omega})"),
                basis,
                vec![dv],
                b,
                None,
                eq,
                dx,
                hess_dv,
                Some(potential.clone()),
            )
        }
        _ => {
            let ell = potential.torus_length().expect("periodic potential");
            let nq = 4 * nx;
            let nodes: Vec<f64> = (0..nq).map(|q| ell * q as f64 / nq as f64).collect();
            let vals: Vec<f64> = nodes.iter().map(|&x| potential.value(x)).collect();
            let grads: Vec<f64> = nodes.iter().map(|&x| potential.grad(x)).collect();
            let hess: Vec<f64> = nodes.iter().map(|&x| potential.hess(x)).collect();
            let flat = grads.iter().all(|g| *g == 0.0);
            let weight = if flat {
                Weight::Uniform
            } else {
                Weight::Gibbs { potential: vals.clone(), grad: grads.clone() }
            };
            let xspec = BasisSpec::fourier(nx, ell).with_quad_points(nq).with_weight(weight);
            let basis = Arc::new(TensorBasis::new(vec![xspec, vspec])?);
            let dv = make_derivation(&basis, Derivation::Dv)?;
            let dx = make_derivation(&basis, Derivation::Dx)?;
            let v = make_derivation(&basis, Derivation::MultV)?;
            let fx = make_derivation(&basis, Derivation::MultFn { factor: Factor::X, samples: grads })?;
            let hx = make_derivation(&basis, Derivation::MultFn { factor: Factor::X, samples: hess })?;
            let b = antisymmetric(v.compose(&dx)?.sub(&fx.compose(&dv)?)?);
            // Flat-picture equilibrium: the coefficients of e^{-V/2}, normalised.
            let q = basis.factors[0].quad();
            let g = CVec::from_fn(nq, |i, _| C64::new(q.weights[i].sqrt() * (-0.5 * vals[i]).exp(), 0.0));
            let phi0 = q.values.adjoint() * g;
            let mut eq = CVec::zeros(basis.dim());
            for (k, c) in phi0.iter().enumerate() {
                eq[basis.flat(&[k, 0])] = *c;
            }
            let n = eq.norm();
            if !(n > 0.0) {
                return Err(ModelError::Invalid("equilibrium has zero norm".into()));
            }
            eq /= C64::new(n, 0.0);
            let hess_dv = hx.compose(&dv)?;
            finish(
                format!("kfp-periodic(ell={ell})"),
                basis,
                vec![dv],
                b,
                None,
                eq,
                dx,
                hess_dv,
                Some(potential.clone()),
            )
        }
    }
}

/// Linear relaxation `L = (I − Π_v) + v∂_x` on `L²(T_ℓ × R, dx ⊗ γ)`.
pub fn build_bgk(ell: f64, nx: usize, nv: usize) -> Result<ModelInstance> {
    if nx < 4 || nv < 4 {
        return Err(ModelError::Invalid(format!("need Nx, Nv ≥ 4, got {nx}×{nv}")));
    }
    let basis = Arc::new(TensorBasis::new(vec![BasisSpec::fourier(nx, ell), BasisSpec::hermite(nv, 1.0)])?);
    let dv = make_derivation(&basis, Derivation::Dv)?;
    let dx = make_derivation(&basis, Derivation::Dx)?;
    let v = make_derivation(&basis, Derivation::MultV)?;
    let b = antisymmetric(v.compose(&dx)?);
    let mut pv = CMat::identity(nv, nv);
    pv[(0, 0)] = C64::new(0.0, 0.0);
    let s = LinOp::new(basis.clone(), spectral_core::derivation::lift(&basis, 1, &pv));
    debug_assert_eq!(s.flag, Symmetry::Symmetric);
    let mut eq = CVec::zeros(basis.dim());
    eq[basis.flat(&[nx / 2, 0])] = C64::new(1.0, 0.0);
    let zero = LinOp::zero(basis.clone());
    finish(format!("bgk(ell={ell})"), basis, vec![dv], b, Some(s), eq, dx, zero, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use spectral_core::spectral_gap;
    use std::f64::consts::PI;

    #[test]
    fn quadratic_ladder_identities() {
        let m = build_kfp(&PotentialSpec::quadratic(1.0), 16, 16).unwrap();
        assert_eq!(m.b.flag, Symmetry::Antisymmetric);
        assert!(m.commutator_residual < 1e-10);
        // [A, A*] = I on interior modes.
        let a = &m.a[0];
        let c = commutator(a, &adjoint_weighted(a)).unwrap();
        let diff = c.sub(&LinOp::identity(m.basis.clone())).unwrap();
        assert!(interior_residual(&diff, 2) < 1e-12);
        assert!(m.l.apply(&m.equilibrium.coeffs).norm() < 1e-12);
    }

    #[test]
    fn flat_torus_transport_is_exact() {
        let m = build_kfp(&PotentialSpec::flat(2.0 * PI), 9, 8).unwrap();
        assert_eq!(m.b.flag, Symmetry::Antisymmetric);
        assert!(m.b.symmetry_residual(-1.0) == 0.0);
        assert!(m.hess_dv.norm_fro() == 0.0);
    }

    #[test]
    fn cosine_equilibrium_is_stationary() {
        let m = build_kfp(&PotentialSpec::cosine(0.5, 2.0 * PI), 17, 24).unwrap();
        assert!(m.l.apply(&m.equilibrium.coeffs).norm() < 1e-8);
        assert_eq!(m.b.flag, Symmetry::Antisymmetric);
        assert!(m.commutator_residual < 1e-10);
    }

    #[test]
    fn bgk_relaxation() {
        let m = build_bgk(2.0 * PI, 8, 10).unwrap();
        let s = m.s.as_ref().unwrap();
        assert!(s.apply(&m.equilibrium.coeffs).norm() == 0.0);
        let s2 = s.compose(s).unwrap();
        assert!((s2.entries - &s.entries).norm() < 1e-14);
        let sv = LinOp::new(
            Arc::new(TensorBasis::new(vec![BasisSpec::hermite(10, 1.0)]).unwrap()),
            CMat::from_fn(10, 10, |i, j| if i == j && i > 0 { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) }),
        );
        let mut e0 = CVec::zeros(10);
        e0[0] = C64::new(1.0, 0.0);
        assert!((spectral_gap(&sv, &[e0]).unwrap() - 1.0).abs() < 1e-12);
        assert!(m.l.apply(&m.equilibrium.coeffs).norm() < 1e-14);
    }

    #[test]
    fn size_and_kind_checks() {
        assert!(build_kfp(&PotentialSpec::quadratic(1.0), 3, 8).is_err());
        assert!(build_bgk(1.0, 8, 2).is_err());
        assert!(build_kfp(&PotentialSpec::quadratic(-1.0), 8, 8).is_err());
    }
}
