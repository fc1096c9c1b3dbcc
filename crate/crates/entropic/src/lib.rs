//! The `L log L` side: kinetic Fokker–Planck in density form on a torus × truncated velocity
//! grid, relative entropy, Fisher information and the distorted Fisher functional.

pub mod experiment;
pub mod functional;
pub mod grid;
pub mod step;

pub use experiment::{entropy_decay, DecayRun, DecaySpec, InitialDatum};
pub use functional::{distorted_energy, entropy_and_fisher, EntropyReport, Ladder, LOG_FLOOR};
pub use grid::GridField;
pub use step::{cfl_bound, grid_step_fp, grid_step_sampled, FpSolver};

#[derive(Debug, thiserror::Error)]
pub enum EntropicError {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("time step {dt:e} violates the stability bound {bound:e}")]
    Cfl { dt: f64, bound: f64 },
    #[error("mass must be positive, got {0:e}")]
    Mass(f64),
    #[error("invalid ladder: {0}")]
    Ladder(String),
    #[error(transparent)]
    Evolve(#[from] evolve::EvolveError),
}

pub type Result<T> = std::result::Result<T, EntropicError>;
