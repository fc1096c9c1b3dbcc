use std::sync::{Arc, OnceLock};

use crate::{frob, CMat, CVec, Result, SpectralError, TensorBasis, C64, EXACT_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Symmetry {
    Symmetric,
    Antisymmetric,
    None,
}

/// Row-compressed copy of a matrix, used for fast repeated application.
#[derive(Debug)]
struct Csr {
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl Csr {
    fn from_dense(m: &CMat) -> Self {
        let mut row_ptr = vec![0];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let z = m[(i, j)];
                if z != C64::new(0.0, 0.0) {
                    cols.push(j);
                    vals.push(z);
                }
            }
            row_ptr.push(cols.len());
        }
        Csr { row_ptr, cols, vals }
    }

    fn apply(&self, x: &CVec) -> CVec {
        CVec::from_fn(self.row_ptr.len() - 1, |i, _| {
            (self.row_ptr[i]..self.row_ptr[i + 1])
                .map(|p| self.vals[p] * x[self.cols[p]])
                .sum()
        })
    }
}

/// Matrix of an operator in the orthonormal basis of `basis`.
#[derive(Debug)]
pub struct LinOp {
    pub basis: Arc<TensorBasis>,
    pub entries: CMat,
    pub flag: Symmetry,
    /// Norm of the part of the exact operator discarded by truncation (or removed by
    /// an explicit symmetrisation).
    pub truncation_defect: f64,
    sparse: OnceLock<Csr>,
}

impl Clone for LinOp {
    fn clone(&self) -> Self {
        LinOp::with_defect(self.basis.clone(), self.entries.clone(), self.truncation_defect)
    }
}

fn detect(m: &CMat) -> Symmetry {
    let scale = frob(m).max(1.0);
    let adj = m.adjoint();
    if frob(&(m - &adj)) / scale <= EXACT_TOL {
        Symmetry::Symmetric
    } else if frob(&(m + &adj)) / scale <= EXACT_TOL {
        Symmetry::Antisymmetric
    } else {
        Symmetry::None
    }
}

impl LinOp {
    pub fn new(basis: Arc<TensorBasis>, entries: CMat) -> Self {
        Self::with_defect(basis, entries, 0.0)
    }

    pub fn with_defect(basis: Arc<TensorBasis>, entries: CMat, defect: f64) -> Self {
        assert_eq!(entries.nrows(), basis.dim(), "matrix does not fit its basis");
        assert!(entries.is_square());
        let flag = detect(&entries);
        LinOp {
            basis,
            entries,
            flag,
            truncation_defect: defect,
            sparse: OnceLock::new(),
        }
    }

    pub fn zero(basis: Arc<TensorBasis>) -> Self {
        let n = basis.dim();
        Self::new(basis, CMat::zeros(n, n))
    }

    pub fn identity(basis: Arc<TensorBasis>) -> Self {
        let n = basis.dim();
        Self::new(basis, CMat::identity(n, n))
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    fn check(&self, other: &LinOp) -> Result<()> {
        if self.dim() != other.dim() || !self.basis.same_shape(&other.basis) {
            return Err(SpectralError::DimensionMismatch(format!(
                "{:?} vs {:?}",
                self.basis.dims(),
                other.basis.dims()
            )));
        }
        Ok(())
    }

    pub fn apply(&self, x: &CVec) -> CVec {
        self.sparse.get_or_init(|| Csr::from_dense(&self.entries)).apply(x)
    }

    pub fn norm_fro(&self) -> f64 {
        frob(&self.entries)
    }

    pub fn compose(&self, other: &LinOp) -> Result<LinOp> {
        self.check(other)?;
        let defect = self.truncation_defect * other.norm_fro() + self.norm_fro() * other.truncation_defect;
        Ok(LinOp::with_defect(self.basis.clone(), product(&self.entries, &other.entries), defect))
    }

    pub fn add(&self, other: &LinOp) -> Result<LinOp> {
        self.check(other)?;
        Ok(LinOp::with_defect(
            self.basis.clone(),
            &self.entries + &other.entries,
            self.truncation_defect + other.truncation_defect,
        ))
    }

    pub fn sub(&self, other: &LinOp) -> Result<LinOp> {
        self.check(other)?;
        Ok(LinOp::with_defect(
            self.basis.clone(),
            &self.entries - &other.entries,
            self.truncation_defect + other.truncation_defect,
        ))
    }

    pub fn scale(&self, s: C64) -> LinOp {
        LinOp::with_defect(self.basis.clone(), &self.entries * s, self.truncation_defect * s.norm())
    }

    /// Replaces the matrix by its antisymmetric part; the correction norm becomes the defect.
    pub fn antisymmetrized(&self) -> LinOp {
        let anti = (&self.entries - self.entries.adjoint()) * C64::new(0.5, 0.0);
        let correction = frob(&(&self.entries - &anti));
        let mut out = LinOp::with_defect(self.basis.clone(), anti, correction);
        out.flag = Symmetry::Antisymmetric;
        out
    }

    /// Replaces the matrix by its Hermitian part.
    pub fn symmetrized(&self) -> LinOp {
        let sym = (&self.entries + self.entries.adjoint()) * C64::new(0.5, 0.0);
        let correction = frob(&(&self.entries - &sym));
        let mut out = LinOp::with_defect(self.basis.clone(), sym, correction);
        out.flag = Symmetry::Symmetric;
        out
    }

    /// `‖M ± M†‖_F / max(1, ‖M‖_F)`, the quantity behind the symmetry flags.
    pub fn symmetry_residual(&self, sign: f64) -> f64 {
        let adj = self.entries.adjoint() * C64::new(sign, 0.0);
        frob(&(&self.entries - adj)) / self.norm_fro().max(1.0)
    }

    /// Frobenius norm of the columns indexed by `cols`.
    pub fn column_norm(&self, cols: &[usize]) -> f64 {
        cols.iter()
            .map(|&j| self.entries.column(j).iter().map(|z| z.norm_sqr()).sum::<f64>())
            .sum::<f64>()
            .sqrt()
    }
}

/// `ab`, skipping structural zeros of both factors when `a` is sparse.
fn product(a: &CMat, b: &CMat) -> CMat {
    let zero = C64::new(0.0, 0.0);
    let cols: Vec<Vec<(usize, C64)>> = (0..a.ncols())
        .map(|k| a.column(k).iter().enumerate().filter(|(_, z)| **z != zero).map(|(i, z)| (i, *z)).collect())
        .collect();
    let nnz: usize = cols.iter().map(Vec::len).sum();
    if nnz * 8 > a.nrows() * a.ncols() {
        return a * b;
    }
    let mut out = CMat::zeros(a.nrows(), b.ncols());
    for j in 0..b.ncols() {
        for (k, col) in cols.iter().enumerate() {
            let bk = b[(k, j)];
            if bk == zero {
                continue;
            }
            for &(i, z) in col {
                out[(i, j)] += z * bk;
            }
        }
    }
    out
}

/// `PQ − QP`.
pub fn commutator(p: &LinOp, q: &LinOp) -> Result<LinOp> {
    p.compose(q)?.sub(&q.compose(p)?)
}

/// Component-wise commutator of an array of operators with a single one.
pub fn commutator_list(ps: &[LinOp], q: &LinOp) -> Result<Vec<LinOp>> {
    ps.iter().map(|p| commutator(p, q)).collect()
}

/// Adjoint in the weighted space; in an orthonormal basis this is the conjugate transpose.
pub fn adjoint_weighted(p: &LinOp) -> LinOp {
    let mut out = LinOp::with_defect(p.basis.clone(), p.entries.adjoint(), p.truncation_defect);
    if p.flag != Symmetry::None {
        out.flag = p.flag;
    }
    out
}

#[derive(Clone, Debug)]
pub struct StateVector {
    pub basis: Arc<TensorBasis>,
    pub coeffs: CVec,
}

impl StateVector {
    pub fn new(basis: Arc<TensorBasis>, coeffs: CVec) -> Result<Self> {
        if coeffs.len() != basis.dim() {
            return Err(SpectralError::DimensionMismatch(format!(
                "state of length {} in a basis of dimension {}",
                coeffs.len(),
                basis.dim()
            )));
        }
        Ok(StateVector { basis, coeffs })
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.norm()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::BasisSpec;

    fn basis(n: usize) -> Arc<TensorBasis> {
        Arc::new(TensorBasis::new(vec![BasisSpec::hermite(n, 1.0)]).unwrap())
    }

    #[test]
    fn self_commutator_vanishes() {
        let b = basis(6);
        let p = LinOp::new(b.clone(), CMat::from_fn(6, 6, |i, j| C64::new((i * j) as f64, i as f64 - j as f64)));
        let c = commutator(&p, &p).unwrap();
        assert!(c.norm_fro() < 1e-12);
    }

    #[test]
    fn flags_are_detected() {
        let b = basis(3);
        let s = LinOp::new(b.clone(), CMat::from_fn(3, 3, |i, j| C64::new((i + j) as f64, 0.0)));
        assert_eq!(s.flag, Symmetry::Symmetric);
        let a = LinOp::new(b.clone(), CMat::from_fn(3, 3, |i, j| C64::new(i as f64 - j as f64, 0.0)));
        assert_eq!(a.flag, Symmetry::Antisymmetric);
        assert_eq!(adjoint_weighted(&a).flag, Symmetry::Antisymmetric);
    }

    #[test]
    fn adjoint_is_an_involution() {
        let b = basis(4);
        let p = LinOp::new(b, CMat::from_fn(4, 4, |i, j| C64::new(i as f64, (3 * j) as f64 - 1.0)));
        let pp = adjoint_weighted(&adjoint_weighted(&p));
        assert_eq!(pp.entries, p.entries);
    }

    #[test]
    fn sparse_apply_matches_dense() {
        let b = basis(5);
        let p = LinOp::new(b, CMat::from_fn(5, 5, |i, j| if (i + j) % 3 == 0 { C64::new(1.0 + i as f64, j as f64) } else { C64::new(0.0, 0.0) }));
        let x = CVec::from_fn(5, |i, _| C64::new(i as f64 - 2.0, 0.5));
        assert!((p.apply(&x) - &p.entries * &x).norm() < 1e-14);
    }

    #[test]
    fn mismatched_bases_are_rejected() {
        let p = LinOp::zero(basis(3));
        let q = LinOp::zero(basis(4));
        assert!(matches!(commutator(&p, &q), Err(SpectralError::DimensionMismatch(_))));
    }
}
