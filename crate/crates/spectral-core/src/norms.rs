use nalgebra::{DMatrix, SymmetricEigen};

use crate::{CVec, LinOp, Result, SpectralError};

/// Coefficients `(a_k, b_k)` of a twisted norm
/// `‖h‖² + Σ_k (a_k ‖C_k h‖² + 2 b_k Re⟨C_k h, C_{k+1} h⟩)`.
///
/// `a` has one entry per chain level and `b` one fewer (the top mixed term pairs with
/// `C_{Nc+1} = 0`).
#[derive(Clone, Debug, PartialEq)]
pub struct TwistCoeffs {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl TwistCoeffs {
    /// The three-coefficient form `‖h‖² + a‖Ah‖² + 2b Re⟨Ah,Ch⟩ + c‖Ch‖²`.
    pub fn abc(a: f64, b: f64, c: f64) -> Self {
        TwistCoeffs { a: vec![a, c], b: vec![b] }
    }

    pub fn levels(&self) -> usize {
        self.a.len()
    }

    /// Real symmetric matrix `T` with `twisted = Σ T_ij Re⟨X_i, X_j⟩`, `X = (h, C_0h, …)`.
    pub fn matrix(&self) -> DMatrix<f64> {
        let n = self.a.len() + 1;
        let mut t = DMatrix::zeros(n, n);
        t[(0, 0)] = 1.0;
        for (k, &a) in self.a.iter().enumerate() {
            t[(k + 1, k + 1)] = a;
        }
        for (k, &b) in self.b.iter().enumerate() {
            t[(k + 1, k + 2)] = b;
            t[(k + 2, k + 1)] = b;
        }
        t
    }

    /// Constants `(lo, hi)` with `lo·‖h‖²_{H¹} ≤ twisted ≤ hi·‖h‖²_{H¹}`.
    pub fn equivalence(&self) -> (f64, f64) {
        let ev = SymmetricEigen::new(self.matrix()).eigenvalues;
        (ev.min(), ev.max())
    }
}

/// Closed-form equivalence bracket of the three-coefficient norm:
/// `min(1,a,c)(1 − b/√(ac))` and `max(1,a,c)(1 + b/√(ac))`.
pub fn equivalence_abc(a: f64, b: f64, c: f64) -> (f64, f64) {
    let r = b.abs() / (a * c).sqrt();
    (a.min(c).min(1.0) * (1.0 - r), a.max(c).max(1.0) * (1.0 + r))
}

#[derive(Clone, Debug)]
pub struct NormsRecord {
    pub l2: f64,
    pub h1: f64,
    /// Squared twisted norm, when coefficients were supplied.
    pub twisted: Option<f64>,
    pub equivalence: Option<(f64, f64)>,
}

/// `‖h‖`, `‖h‖_{H¹} = (‖h‖² + Σ‖C_j h‖²)^{1/2}` and the twisted quadratic form.
pub fn norms(h: &CVec, chain: &[LinOp], ladder: Option<&TwistCoeffs>) -> Result<NormsRecord> {
    if let Some(l) = ladder {
        if l.a.len() != chain.len() || l.b.len() + 1 != chain.len() {
            return Err(SpectralError::LadderLength {
                expected: chain.len(),
                got: l.a.len(),
            });
        }
    }
    for c in chain {
        if c.dim() != h.len() {
            return Err(SpectralError::DimensionMismatch("chain vs state".into()));
        }
    }
    let images: Vec<CVec> = chain.iter().map(|c| c.apply(h)).collect();
    let l2sq = h.norm_squared();
    let h1sq = l2sq + images.iter().map(|x| x.norm_squared()).sum::<f64>();
    let twisted = ladder.map(|l| {
        let mut t = l2sq;
        for (k, &a) in l.a.iter().enumerate() {
            t += a * images[k].norm_squared();
        }
        for (k, &b) in l.b.iter().enumerate() {
            t += 2.0 * b * images[k].dotc(&images[k + 1]).re;
        }
        t
    });
    Ok(NormsRecord {
        l2: l2sq.sqrt(),
        h1: h1sq.sqrt(),
        twisted,
        equivalence: ladder.map(|l| l.equivalence()),
    })
}

/// Gram operator `G` of the twisted inner product, `⟨⟨h, g⟩⟩ = ⟨h, G g⟩`.
pub fn twisted_gram(chain: &[LinOp], ladder: &TwistCoeffs) -> Result<LinOp> {
    if ladder.a.len() != chain.len() || ladder.b.len() + 1 != chain.len() {
        return Err(SpectralError::LadderLength {
            expected: chain.len(),
            got: ladder.a.len(),
        });
    }
    let basis = chain[0].basis.clone();
    let mut g = crate::CMat::identity(basis.dim(), basis.dim());
    for (k, &a) in ladder.a.iter().enumerate() {
        let c = &chain[k].entries;
        g += c.adjoint() * c * crate::C64::new(a, 0.0);
    }
    for (k, &b) in ladder.b.iter().enumerate() {
        let (c0, c1) = (&chain[k].entries, &chain[k + 1].entries);
        let cross = c0.adjoint() * c1;
        g += (&cross + cross.adjoint()) * crate::C64::new(b, 0.0);
    }
    Ok(LinOp::new(basis, g))
}
