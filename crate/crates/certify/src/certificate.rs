use std::fmt::Write as _;

use models::ModelInstance;
use nalgebra::{DMatrix, SymmetricEigen};
use spectral_core::{
    adjoint_weighted, commutator, relative_bound_constant, spectral_gap, LinOp, TwistCoeffs,
};

use crate::{CertifyError, CommutatorChain, Result};

/// Constants `α`, `β`, `κ` of the basic theorem, with `M = max(1, α, β)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundConstants {
    pub alpha: f64,
    pub beta: f64,
    pub kappa: f64,
}

impl BoundConstants {
    pub fn new(alpha: f64, beta: f64, kappa: f64) -> Result<Self> {
        if !(alpha >= 0.0 && beta >= 0.0 && kappa >= 0.0) {
            return Err(CertifyError::Invalid("α, β, κ must be nonnegative".into()));
        }
        Ok(BoundConstants { alpha, beta, kappa })
    }

    pub fn m(&self) -> f64 {
        1f64.max(self.alpha).max(self.beta)
    }
}

#[derive(Clone, Debug)]
pub struct CertifyReport {
    pub kind: &'static str,
    pub matrix: DMatrix<f64>,
    pub min_eig: f64,
    pub rate: Option<f64>,
    pub equivalence: (f64, f64),
    pub coefficients: (f64, f64, f64),
    /// `(a, b, c, objective)` of every optimizer evaluation, when an optimizer ran.
    pub trace: Vec<[f64; 4]>,
}

impl CertifyReport {
    pub fn certified(&self) -> bool {
        self.min_eig > 0.0
    }

    /// One `key=value` per line.
    pub fn to_record(&self) -> String {
        let mut s = String::new();
        let n = self.matrix.nrows();
        let (a, b, c) = self.coefficients;
        let _ = writeln!(s, "kind={}", self.kind);
        let _ = writeln!(s, "a={a:e}\nb={b:e}\nc={c:e}");
        for i in 0..n {
            let row: Vec<String> = (0..n).map(|j| format!("{:e}", self.matrix[(i, j)])).collect();
            let _ = writeln!(s, "m.row{}={}", i + 1, row.join(","));
        }
        let _ = writeln!(s, "min_eig={:e}", self.min_eig);
        let _ = writeln!(s, "certified={}", self.certified());
        match self.rate {
            Some(r) => {
                let _ = writeln!(s, "rate={r:e}");
            }
            None => {
                let _ = writeln!(s, "rate=none");
            }
        }
        let _ = writeln!(s, "equivalence.lo={:e}\nequivalence.hi={:e}", self.equivalence.0, self.equivalence.1);
        let _ = writeln!(s, "trace.len={}", self.trace.len());
        s
    }
}

/// Smallest eigenvalue of `(m + mᵀ)/2`.
pub fn symmetric_min_eig(m: &DMatrix<f64>) -> f64 {
    let sym = (m + m.transpose()) * 0.5;
    SymmetricEigen::new(sym).eigenvalues.min()
}

/// Smallest eigenvalue of `D^{-1/2}(m + mᵀ)/2 D^{-1/2}`, `D` the diagonal of the symmetric part.
///
/// Congruence preserves the sign pattern of the spectrum, and the scaled matrix has unit
/// diagonal, so the sign stays reliable when the diagonal spans many orders of magnitude.
/// Returns the smallest diagonal entry instead when one is not positive.
pub fn scaled_min_eig(m: &DMatrix<f64>) -> f64 {
    let sym = (m + m.transpose()) * 0.5;
    let d = sym.diagonal();
    let dmin = d.min();
    if !(dmin > 0.0) {
        return dmin;
    }
    let s = d.map(|x| x.sqrt().recip());
    let scaled = DMatrix::from_fn(sym.nrows(), sym.ncols(), |i, j| sym[(i, j)] * s[i] * s[j]);
    SymmetricEigen::new(scaled).eigenvalues.min()
}

/// The 4×4 matrix with `Re⟨⟨h,Lh⟩⟩ ≥ ⟨X, mX⟩`, `X = (‖Ah‖, ‖A²h‖, ‖Ch‖, ‖CAh‖)`.
pub fn aab_matrix(alpha: f64, beta: f64, a: f64, b: f64, c: f64) -> DMatrix<f64> {
    let (al, be) = (alpha, beta);
    DMatrix::from_row_slice(
        4,
        4,
        &[
            1.0 - (a * al + b * be),
            -(a * al + b * be),
            -(a + b * al + b * be + c * be),
            -b * be,
            0.0,
            a,
            -(b * al + c * be),
            -2.0 * b,
            0.0,
            0.0,
            b - c * be,
            -c * be,
            0.0,
            0.0,
            0.0,
            c,
        ],
    )
}

/// Certificate for `L = A*A + B` with twisted norm `‖h‖² + a‖Ah‖² + 2b Re⟨Ah,Ch⟩ + c‖Ch‖²`.
///
/// When the symmetric part is positive definite with minimum `μ` and `κ > 0`, the twisted norm
/// decays at least like `e^{-λt}` with `λ = μ min(1,κ)/(2Λ)`, `Λ` the upper equivalence
/// constant.
pub fn certificate_matrix_aab(consts: &BoundConstants, a: f64, b: f64, c: f64) -> Result<CertifyReport> {
    if !(a > 0.0 && b > 0.0 && c > 0.0) {
        return Err(CertifyError::Invalid("a, b, c must be positive".into()));
    }
    if b * b > a * c {
        return Err(CertifyError::Invalid(format!("b² = {:e} exceeds ac = {:e}", b * b, a * c)));
    }
    let matrix = aab_matrix(consts.alpha, consts.beta, a, b, c);
    let min_eig = symmetric_min_eig(&matrix);
    let equivalence = TwistCoeffs::abc(a, b, c).equivalence();
    let rate = (min_eig > 0.0 && consts.kappa > 0.0)
        .then(|| min_eig * consts.kappa.min(1.0) / (2.0 * equivalence.1));
    Ok(CertifyReport {
        kind: "aab",
        matrix,
        min_eig,
        rate,
        equivalence,
        coefficients: (a, b, c),
        trace: Vec::new(),
    })
}

/// The 5×5 matrix for `L = S + B`, `X = (‖√S h‖, ‖√S Ch‖, ‖Ch‖, ‖√S Ah‖, ‖Ah‖)`.
pub fn sb_matrix(m: f64, a: f64, b: f64, c: f64) -> DMatrix<f64> {
    DMatrix::from_row_slice(
        5,
        5,
        &[
            1.0 - m * b - m * c,
            -m * a - m * b,
            -m * a - m * b,
            -m * b,
            -m * c,
            0.0,
            a - m * b - m * c,
            -m * b,
            -m * b,
            -m * c,
            0.0,
            0.0,
            b - m * c,
            0.0,
            -m * c,
            0.0,
            0.0,
            0.0,
            c,
            0.0,
            0.0,
            0.0,
            0.0,
            0.0,
            c,
        ],
    )
}

pub fn certificate_matrix_sb(m: f64, a: f64, b: f64, c: f64) -> Result<CertifyReport> {
    if !(a > 0.0 && b > 0.0 && c > 0.0) {
        return Err(CertifyError::Invalid("a, b, c must be positive".into()));
    }
    if !(m >= 1.0) {
        return Err(CertifyError::Invalid("the common bound M must be ≥ 1".into()));
    }
    let matrix = sb_matrix(m, a, b, c);
    let min_eig = symmetric_min_eig(&matrix);
    Ok(CertifyReport {
        kind: "sb",
        matrix,
        min_eig,
        rate: None,
        equivalence: TwistCoeffs::abc(a, b, c).equivalence(),
        coefficients: (a, b, c),
        trace: Vec::new(),
    })
}

/// `min((1 − (a + bM + ¼))/(2a + κ⁻¹), (b − (a + b + cM)²)/(2c + κ⁻¹))`.
pub fn explicit_objective(m: f64, kappa: f64, a: f64, b: f64, c: f64) -> f64 {
    let ik = 1.0 / kappa;
    let first = (1.0 - (a + b * m + 0.25)) / (2.0 * a + ik);
    let second = (b - (a + b + c * m).powi(2)) / (2.0 * c + ik);
    first.min(second)
}

#[derive(Clone, Debug)]
pub struct RateOptimum {
    pub rate: f64,
    pub abc: (f64, f64, f64),
    pub trace: Vec<[f64; 4]>,
}

/// Objective in coordinates `y = (ln a, ln c, ln s)`, `b = s√(ac)`, so that `b² ≤ ac` is `s ≤ 1`.
fn feasible_value(m: f64, kappa: f64, y: [f64; 3]) -> Option<([f64; 3], f64)> {
    if y[2] > 0.0 {
        return None;
    }
    let (a, c) = (y[0].exp(), y[1].exp());
    let mut b = y[2].exp() * (a * c).sqrt();
    while b * b > a * c {
        b *= 1.0 - f64::EPSILON;
    }
    Some(([a, b, c], explicit_objective(m, kappa, a, b, c)))
}

/// Maximises [`explicit_objective`] over `b² ≤ ac`: log-grid over `a, c ∈ [1e-4, 1]` and
/// `b/√(ac) ∈ [1e-2, 1]`, then compass search from the best grid points.
pub fn certified_rate_quadratic(m: f64, kappa: f64) -> Result<RateOptimum> {
    if !(m >= 0.0) || !(kappa > 0.0) {
        return Err(CertifyError::Invalid("need M ≥ 0 and κ > 0".into()));
    }
    let ln10 = std::f64::consts::LN_10;
    let grid: Vec<f64> = (0..=24).map(|i| (-4.0 + i as f64 / 6.0) * ln10).collect();
    let ratios: Vec<f64> = (0..=12).map(|i| -(i as f64) / 6.0 * ln10).collect();
    let mut trace = Vec::new();
    let mut seeds: Vec<(f64, [f64; 3])> = Vec::new();
    for &ya in &grid {
        for &yc in &grid {
            for &ys in &ratios {
                let y = [ya, yc, ys];
                if let Some(([a, b, c], v)) = feasible_value(m, kappa, y) {
                    trace.push([a, b, c, v]);
                    seeds.push((v, y));
                }
            }
        }
    }
    seeds.sort_by(|p, q| q.0.total_cmp(&p.0));
    let mut best = (f64::NEG_INFINITY, [0.0; 3]);
    for &(v0, y0) in seeds.iter().take(4) {
        let (mut v, mut y) = (v0, y0);
        let mut step = 0.5;
        while step > 1e-12 {
            let mut moved = false;
            for i in 0..3 {
                for dir in [-1.0, 1.0] {
                    let mut t = y;
                    t[i] = if i == 2 { (t[i] + dir * step).min(0.0) } else { t[i] + dir * step };
                    if let Some(([a, b, c], vt)) = feasible_value(m, kappa, t) {
                        if vt > v {
                            trace.push([a, b, c, vt]);
                            v = vt;
                            y = t;
                            moved = true;
                        }
                    }
                }
            }
            if !moved {
                step *= 0.5;
            }
        }
        if v > best.0 {
            best = (v, y);
        }
    }
    let ([a, b, c], rate) = feasible_value(m, kappa, best.1).expect("best point is feasible");
    Ok(RateOptimum { rate, abc: (a, b, c), trace })
}

/// Restriction of `op` to the coordinate subspace spanned by `cols`.
fn restrict(op: &LinOp, cols: &[usize]) -> LinOp {
    let mut e = op.entries.clone() * spectral_core::C64::new(0.0, 0.0);
    for &j in cols {
        e.set_column(j, &op.entries.column(j));
    }
    LinOp::with_defect(op.basis.clone(), e, op.truncation_defect)
}

/// Estimates `α`, `β`, `κ` for a model with a one-step chain (`C = C_1`, `R_2` its remainder).
///
/// `α` bounds `[A,A*]` relative to `(I, A)` and `β` bounds `R_2` relative to
/// `(A, A², C, CA)`, both in the quadratic-sum convention and on modes `margin` steps inside
/// the truncation; recorded truncation defects are then added (`β` through `κ^{-1/2}`).
pub fn bound_constants(model: &ModelInstance, chain: &CommutatorChain, margin: usize) -> Result<BoundConstants> {
    let a = &chain.c[0];
    let c = chain.c.get(1).ok_or_else(|| CertifyError::Invalid("chain has no C_1".into()))?;
    let r2 = &chain.r[1];
    let cols = model.basis.interior(margin);
    let id = LinOp::identity(model.basis.clone());
    let aa = commutator(a, &adjoint_weighted(a))?;
    let alpha = relative_bound_constant(&[restrict(&aa, &cols)], &[restrict(&id, &cols), restrict(a, &cols)])?;
    let a2 = a.compose(a)?;
    let ca = c.compose(a)?;
    let beta = relative_bound_constant(
        &[restrict(r2, &cols)],
        &[restrict(a, &cols), restrict(&a2, &cols), restrict(c, &cols), restrict(&ca, &cols)],
    )?;
    let p = adjoint_weighted(a).compose(a)?.add(&adjoint_weighted(c).compose(c)?)?;
    let kappa = spectral_gap(&p, &model.kernel())?;
    if alpha.unbounded || beta.unbounded {
        return Err(CertifyError::Invalid("commutator terms are not relatively bounded".into()));
    }
    let beta_inflation = if kappa > 0.0 { r2.truncation_defect / kappa.sqrt() } else { f64::INFINITY };
    BoundConstants::new(alpha.alpha + aa.truncation_defect, beta.alpha + beta_inflation, kappa)
}
