//! Coercivity certificates for degenerate operators: commutator chains, coefficient ladders,
//! the certificate matrices of `A*A + B` and `S + B`, certified-rate optimisation and
//! tensorization gap bounds.

pub mod certificate;
pub mod chain;
pub mod coercivity;
pub mod ladder;
pub mod tensor;

pub use certificate::{
    aab_matrix, bound_constants, certificate_matrix_aab, certificate_matrix_sb, certified_rate_quadratic,
    explicit_objective, sb_matrix, scaled_min_eig, symmetric_min_eig, BoundConstants, CertifyReport, RateOptimum,
};
pub use chain::{commutator_chain, CommutatorChain, Principal};
pub use coercivity::{coercivity_check, Coercivity};
pub use ladder::{
    alphas, eps1, eps_extended, ladder_geometric, ladder_nonlinear, part_one_ladder, validate_geometric,
    validate_part_one, GeometricLadder, NonlinearLadder, SchedulePath,
};
pub use tensor::{tensor_gap_bound, tensor_gap_bound_multiplier};

#[derive(Debug, thiserror::Error)]
pub enum CertifyError {
    #[error("invalid certificate input: {0}")]
    Invalid(String),
    #[error("commutator chain invariant fails at level {level}: residual {residual:e}")]
    ChainInvariant { level: usize, residual: f64 },
    #[error(transparent)]
    Spectral(#[from] spectral_core::SpectralError),
    #[error(transparent)]
    Model(#[from] models::ModelError),
}

pub type Result<T> = std::result::Result<T, CertifyError>;
