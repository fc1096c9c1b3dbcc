//! Time evolution along `e^{-tL}`: propagation with functional tracking, exponential and
//! power-law fits, Hérau-type regularization functionals, the differential-inequality
//! verdict, a Nash-type interpolation check, and closed-form plane-wave solutions of the
//! quadratic kinetic Fokker–Planck equation.

pub mod diffineq;
pub mod exact;
pub mod fit;
pub mod herau;
pub mod nash;
pub mod propagate;
pub mod trajectory;

pub use diffineq::{diffineq_check, DiffIneqInstance, DiffIneqVerdict};
pub use exact::PlaneWaveSolution;
pub use fit::{fit_rate, DecayFit, FitKind, R2_RELIABLE};
pub use herau::{herau_check, HerauReport};
pub use nash::{nash_check, nash_theta, NashRecord};
pub use propagate::{propagate, Functionals, Propagation, Scheme, SchemeUsed, EIG_RESIDUAL_TOL};
pub use trajectory::Trajectory;

#[derive(Debug, thiserror::Error)]
pub enum EvolveError {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("functional `{0}` is not tracked")]
    Missing(String),
    #[error("nonpositive value {value:e} of `{name}` at t = {t}")]
    NonPositive { name: String, t: f64, value: f64 },
    #[error(transparent)]
    Spectral(#[from] spectral_core::SpectralError),
}

pub type Result<T> = std::result::Result<T, EvolveError>;
