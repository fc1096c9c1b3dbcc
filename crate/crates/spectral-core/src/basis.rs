use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::{CMat, Result, SpectralError, C64, EXACT_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasisKind {
    FourierTorus,
    HermiteGauss,
}

/// Reference density of the Hilbert space a factor lives in.
#[derive(Clone, Debug, PartialEq)]
pub enum Weight {
    /// Normalised Lebesgue measure on the torus.
    Uniform,
    /// Centred Gaussian of variance `σ²`.
    Gaussian,
    /// Plain Lebesgue measure on the line; the basis is made of Hermite functions.
    Lebesgue,
    /// `e^{-V}/Z` on the torus. `grad` holds `V'` at the quadrature nodes.
    ///
    /// The factor is handled through the ground-state map `h ↦ h e^{-V/2}`, so basis
    /// functions are `e^{ikx} e^{V/2} √Z` and `∂_x` picks up `V'/2`.
    Gibbs { potential: Vec<f64>, grad: Vec<f64> },
}

/// Role of a factor in phase space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Factor {
    X,
    V,
}

#[derive(Clone, Debug)]
pub struct Quadrature {
    pub nodes: Vec<f64>,
    /// Weights of the reference probability measure. Far Gauss–Hermite tails underflow to 0.
    pub weights: Vec<f64>,
    /// `nq × N` matrix with entries `√w_q ψ_k(x_q)`; `Φ†Φ = I` and
    /// `⟨ψ_j, f ψ_k⟩ = (Φ† diag(f) Φ)_{jk}`.
    pub values: CMat,
}

#[derive(Clone, Debug)]
pub struct BasisSpec {
    pub kind: BasisKind,
    pub size: usize,
    /// Torus length `ℓ` (Fourier) or Gaussian scale `σ` (Hermite).
    pub scale: f64,
    pub weight: Weight,
    pub quad_points: Option<usize>,
    pub quadrature: Option<Quadrature>,
}

impl BasisSpec {
    pub fn hermite(size: usize, sigma: f64) -> Self {
        BasisSpec {
            kind: BasisKind::HermiteGauss,
            size,
            scale: sigma,
            weight: Weight::Gaussian,
            quad_points: None,
            quadrature: None,
        }
    }

    pub fn fourier(size: usize, ell: f64) -> Self {
        BasisSpec {
            kind: BasisKind::FourierTorus,
            size,
            scale: ell,
            weight: Weight::Uniform,
            quad_points: None,
            quadrature: None,
        }
    }

    pub fn with_weight(mut self, weight: Weight) -> Self {
        self.weight = weight;
        self
    }

    pub fn with_quad_points(mut self, nq: usize) -> Self {
        self.quad_points = Some(nq);
        self
    }

    /// Number of quadrature nodes the builder will use.
    pub fn quad_len(&self) -> usize {
        match (self.quad_points, self.kind) {
            (Some(q), _) => q,
            (None, BasisKind::HermiteGauss) => 2 * self.size,
            (None, BasisKind::FourierTorus) => 4 * self.size,
        }
    }

    /// Wave numbers of the Fourier modes, in basis order.
    pub fn wave_numbers(&self) -> Vec<i64> {
        let n = self.size as i64;
        (0..n).map(|j| j - n / 2).collect()
    }

    pub fn quad(&self) -> &Quadrature {
        self.quadrature
            .as_ref()
            .expect("basis used before build_basis attached its quadrature")
    }

    /// Distance of mode `j` from the truncation edge, in units of one ladder step.
    pub fn edge_distance(&self, j: usize) -> usize {
        match self.kind {
            BasisKind::HermiteGauss => self.size - 1 - j,
            BasisKind::FourierTorus => {
                let ks = self.wave_numbers();
                let kmax = ks[ks.len() - 1].min(-ks[0]);
                (kmax - ks[j].abs()).max(0) as usize
            }
        }
    }
}

/// Validates a spec and attaches its quadrature.
pub fn build_basis(spec: BasisSpec) -> Result<BasisSpec> {
    if spec.size < 2 {
        return Err(SpectralError::InvalidParameter(format!(
            "basis size {} < 2",
            spec.size
        )));
    }
    if !(spec.scale > 0.0) || !spec.scale.is_finite() {
        return Err(SpectralError::InvalidParameter(format!(
            "domain parameter {} must be positive",
            spec.scale
        )));
    }
    let nq = spec.quad_len();
    match spec.kind {
        BasisKind::HermiteGauss => {
            if matches!(spec.weight, Weight::Uniform | Weight::Gibbs { .. }) {
                return Err(SpectralError::Unsupported(
                    "hermite factor needs a Gaussian or Lebesgue weight".into(),
                ));
            }
            if nq < spec.size {
                return Err(SpectralError::InvalidParameter(
                    "fewer quadrature nodes than modes".into(),
                ));
            }
        }
        BasisKind::FourierTorus => {
            if matches!(spec.weight, Weight::Gaussian | Weight::Lebesgue) {
                return Err(SpectralError::Unsupported(
                    "fourier factor needs a uniform or Gibbs weight".into(),
                ));
            }
            if nq < 2 * spec.size {
                return Err(SpectralError::InvalidParameter(
                    "fourier quadrature needs at least 2N nodes".into(),
                ));
            }
            if let Weight::Gibbs { potential, grad } = &spec.weight {
                if potential.len() != nq || grad.len() != nq {
                    return Err(SpectralError::InvalidParameter(
                        "Gibbs samples must be given at every quadrature node".into(),
                    ));
                }
            }
        }
    }
    let quadrature = match spec.kind {
        BasisKind::HermiteGauss => hermite_quadrature(spec.size, nq, spec.scale)?,
        BasisKind::FourierTorus => fourier_quadrature(&spec.wave_numbers(), nq, spec.scale),
    };
    let gram = quadrature.values.adjoint() * &quadrature.values;
    let err = (gram - CMat::identity(spec.size, spec.size))
        .iter()
        .fold(0.0f64, |m, z| m.max(z.norm()));
    if err > EXACT_TOL {
        return Err(SpectralError::Numerical(format!(
            "Gram matrix deviates from identity by {err:e}"
        )));
    }
    Ok(BasisSpec {
        quadrature: Some(quadrature),
        quad_points: Some(nq),
        ..spec
    })
}

/// Normalised Hermite functions `φ_k(x) = He_k(x)/√k! · e^{-x²/4}` for `k < n`.
///
/// The three-term recurrence runs on rescaled values so that neither the polynomial
/// nor the Gaussian factor over- or underflows at large `|x|`.
pub fn hermite_functions(x: f64, n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n];
    let (mut prev, mut cur) = (0.0f64, 1.0f64);
    let mut log_scale = 0.0f64;
    for (k, slot) in out.iter_mut().enumerate() {
        *slot = cur * (log_scale - 0.25 * x * x).exp();
        let next = (x * cur - (k as f64).sqrt() * prev) / ((k + 1) as f64).sqrt();
        prev = cur;
        cur = next;
        if cur.abs() > 1e100 {
            prev *= 1e-100;
            cur *= 1e-100;
            log_scale += 100.0 * std::f64::consts::LN_10;
        }
    }
    out
}

/// Nodes of the `nq`-point Gauss rule for the standard Gaussian, polished by Newton.
fn gauss_hermite_nodes(nq: usize) -> Vec<f64> {
    let mut jacobi = DMatrix::<f64>::zeros(nq, nq);
    for k in 1..nq {
        let b = (k as f64).sqrt();
        jacobi[(k - 1, k)] = b;
        jacobi[(k, k - 1)] = b;
    }
    let mut nodes: Vec<f64> = SymmetricEigen::new(jacobi).eigenvalues.iter().copied().collect();
    nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for x in nodes.iter_mut() {
        for _ in 0..3 {
            let phi = hermite_functions(*x, nq + 1);
            let (pn, pm) = (phi[nq], phi[nq - 1]);
            let d = (nq as f64).sqrt() * pm - 0.5 * *x * pn;
            if d != 0.0 && d.is_finite() {
                *x -= pn / d;
            }
        }
    }
    nodes
}

fn hermite_quadrature(n: usize, nq: usize, sigma: f64) -> Result<Quadrature> {
    let xi = gauss_hermite_nodes(nq);
    let mut values = CMat::zeros(nq, n);
    let mut weights = Vec::with_capacity(nq);
    for (q, &x) in xi.iter().enumerate() {
        let phi = hermite_functions(x, nq);
        // Christoffel weight of the rescaled functions: w_q e^{x²/2}.
        let scaled = 1.0 / phi.iter().map(|p| p * p).sum::<f64>();
        if !scaled.is_finite() {
            return Err(SpectralError::Numerical("Gauss–Hermite weight overflow".into()));
        }
        weights.push(scaled * (-0.5 * x * x).exp());
        let s = scaled.sqrt();
        for k in 0..n {
            values[(q, k)] = C64::new(s * phi[k], 0.0);
        }
    }
    Ok(Quadrature {
        nodes: xi.iter().map(|x| sigma * x).collect(),
        weights,
        values,
    })
}

fn fourier_quadrature(ks: &[i64], nq: usize, ell: f64) -> Quadrature {
    let nodes: Vec<f64> = (0..nq).map(|q| ell * q as f64 / nq as f64).collect();
    let norm = 1.0 / (nq as f64).sqrt();
    let values = CMat::from_fn(nq, ks.len(), |q, j| {
        C64::from_polar(norm, 2.0 * PI * ks[j] as f64 * nodes[q] / ell)
    });
    Quadrature {
        nodes,
        weights: vec![1.0 / nq as f64; nq],
        values,
    }
}

/// Ordered product of one-dimensional bases; the last factor varies fastest.
#[derive(Clone, Debug)]
pub struct TensorBasis {
    pub factors: Vec<BasisSpec>,
}

impl TensorBasis {
    pub fn new(factors: Vec<BasisSpec>) -> Result<Self> {
        if factors.is_empty() {
            return Err(SpectralError::InvalidParameter("no factors".into()));
        }
        let factors = factors
            .into_iter()
            .map(|f| if f.quadrature.is_some() { Ok(f) } else { build_basis(f) })
            .collect::<Result<Vec<_>>>()?;
        Ok(TensorBasis { factors })
    }

    pub fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.size).collect()
    }

    pub fn dim(&self) -> usize {
        self.factors.iter().map(|f| f.size).product()
    }

    pub fn flat(&self, multi: &[usize]) -> usize {
        multi
            .iter()
            .zip(&self.factors)
            .fold(0, |acc, (&i, f)| acc * f.size + i)
    }

    pub fn multi(&self, mut flat: usize) -> Vec<usize> {
        let mut out = vec![0; self.factors.len()];
        for (slot, f) in out.iter_mut().zip(&self.factors).rev() {
            *slot = flat % f.size;
            flat /= f.size;
        }
        out
    }

    /// Factor index playing the given role: `x` is first and `v` last.
    pub fn factor_index(&self, role: Factor) -> usize {
        match role {
            Factor::X => 0,
            Factor::V => self.factors.len() - 1,
        }
    }

    /// Flat indices whose every factor index stays `margin` steps away from truncation.
    pub fn interior(&self, margin: usize) -> Vec<usize> {
        (0..self.dim())
            .filter(|&i| {
                self.multi(i)
                    .iter()
                    .zip(&self.factors)
                    .all(|(&j, f)| f.edge_distance(j) >= margin)
            })
            .collect()
    }

    pub fn same_shape(&self, other: &TensorBasis) -> bool {
        self.dims() == other.dims()
            && self
                .factors
                .iter()
                .zip(&other.factors)
                .all(|(a, b)| a.kind == b.kind && a.scale == b.scale)
    }
}
