//! Concrete degenerate operators: kinetic Fokker–Planck with quadratic or periodic
//! confinement, linear BGK relaxation, the Oseen model problem and tensor-product toys.

pub mod kinetic;
pub mod oseen;
pub mod potential;
pub mod tensor;

pub use kinetic::{build_bgk, build_kfp, ModelInstance};
pub use oseen::{build_oseen, OseenInstance, OseenProfile, OSEEN_TAIL};
pub use potential::{check_growth_condition, PotentialKind, PotentialSpec};
pub use tensor::{build_tensor_toy, TensorToy};

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("invalid model parameter: {0}")]
    Invalid(String),
    #[error(transparent)]
    Spectral(#[from] spectral_core::SpectralError),
}

pub type Result<T> = std::result::Result<T, ModelError>;
