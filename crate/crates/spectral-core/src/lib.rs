//! Linear-algebra substrate for degenerate dissipative operators `L = A*A + B`.
//!
//! Everything is represented in an orthonormal basis of a weighted `L²` space, so the
//! weighted adjoint of an operator is the conjugate transpose of its matrix. Bases are
//! built from Hermite functions (Gaussian weights) or Fourier modes (torus), possibly
//! tensorised into a phase space `(x, v)`.

pub mod basis;
pub mod derivation;
pub mod gap;
pub mod linop;
pub mod norms;

pub use basis::{build_basis, BasisKind, BasisSpec, Factor, Quadrature, TensorBasis, Weight};
pub use derivation::{make_derivation, Derivation};
pub use gap::{relative_bound_constant, spectral_gap, spectral_gap_with_limit, RelativeBound};
pub use linop::{adjoint_weighted, commutator, commutator_list, LinOp, StateVector, Symmetry};
pub use norms::{equivalence_abc, norms, twisted_gram, NormsRecord, TwistCoeffs};

use nalgebra::{DMatrix, DVector};
pub use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Tolerance for identities that hold exactly on closed-form entries.
pub const EXACT_TOL: f64 = 1e-10;
/// Tolerance for quantities contaminated by truncation.
pub const TRUNC_TOL: f64 = 1e-6;

#[derive(Debug, thiserror::Error)]
pub enum SpectralError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unsupported combination: {0}")]
    Unsupported(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("operator is not flagged symmetric")]
    NotSymmetric,
    #[error("negative eigenvalue {0:e} below -1e-8 (discretisation inconsistency)")]
    NegativeEigenvalue(f64),
    #[error("all reference operators vanish")]
    AllZero,
    #[error("ladder length {got} does not match chain length {expected}")]
    LadderLength { expected: usize, got: usize },
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, SpectralError>;

pub(crate) fn frob(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
