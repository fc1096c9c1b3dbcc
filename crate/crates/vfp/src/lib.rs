//! Weakly self-consistent Vlasov–Fokker–Planck on the torus: self-consistent force, frozen-force
//! splitting step, free energy, and the nonlinear Lyapunov functional with `Π₁f = ρM`.

pub mod coupling;
pub mod energy;
pub mod experiment;
pub mod lyapunov;
pub mod state;

pub use coupling::{smallness, CouplingSpec};
pub use energy::{free_energy, FreeEnergy};
pub use experiment::{vfp_convergence, Rebracket, VfpRun, VfpSpec};
pub use lyapunov::{lyapunov_with, nonlinear_lyapunov, LyapunovReport};
pub use state::{self_consistent_force, vfp_step, VfpState};

#[derive(Debug, thiserror::Error)]
pub enum VfpError {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("schedule does not fit the bracket: {0}")]
    Schedule(String),
    #[error(transparent)]
    Entropic(#[from] entropic::EntropicError),
    #[error(transparent)]
    Certify(#[from] certify::CertifyError),
    #[error(transparent)]
    Evolve(#[from] evolve::EvolveError),
}

pub type Result<T> = std::result::Result<T, VfpError>;
