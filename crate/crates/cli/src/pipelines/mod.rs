pub mod certify;
pub mod decay;
pub mod entropy;
pub mod oseen;
pub mod regularize;
pub mod tensor;
pub mod vfp;

use std::fmt::Display;

use crate::config::{Config, Mode};
use crate::output::Outcome;
use crate::{CliError, Result};

pub use self::certify::CertifyPlan;
pub use self::decay::DecayPlan;
pub use self::entropy::EntropyPlan;
pub use self::oseen::{loglog_slope, OseenPlan};
pub use self::regularize::RegularizePlan;
pub use self::tensor::TensorPlan;
pub use self::vfp::VfpPlan;

pub(crate) fn ctx<E: Display>(context: &str) -> impl FnOnce(E) -> CliError + '_ {
    move |e| CliError::Module { context: context.to_string(), message: e.to_string() }
}

/// A parsed and validated experiment; nothing has been computed yet.
#[derive(Clone, Debug)]
pub enum Plan {
    Certify(CertifyPlan),
    Decay(DecayPlan),
    Regularize(RegularizePlan),
    Entropy(EntropyPlan),
    Oseen(OseenPlan),
    Vfp(VfpPlan),
    Tensor(TensorPlan),
}

impl Plan {
    pub fn parse(cfg: &Config) -> Result<Self> {
        let plan = match cfg.mode()? {
            Mode::Certify => Plan::Certify(CertifyPlan::parse(cfg)?),
            Mode::Decay => Plan::Decay(DecayPlan::parse(cfg)?),
            Mode::Regularize => Plan::Regularize(RegularizePlan::parse(cfg)?),
            Mode::Entropy => Plan::Entropy(EntropyPlan::parse(cfg)?),
            Mode::Oseen => Plan::Oseen(OseenPlan::parse(cfg)?),
            Mode::Vfp => Plan::Vfp(VfpPlan::parse(cfg)?),
            Mode::Tensor => Plan::Tensor(TensorPlan::parse(cfg)?),
        };
        Ok(plan)
    }

    pub fn mode(&self) -> Mode {
        match self {
            Plan::Certify(_) => Mode::Certify,
            Plan::Decay(_) => Mode::Decay,
            Plan::Regularize(_) => Mode::Regularize,
            Plan::Entropy(_) => Mode::Entropy,
            Plan::Oseen(_) => Mode::Oseen,
            Plan::Vfp(_) => Mode::Vfp,
            Plan::Tensor(_) => Mode::Tensor,
        }
    }

    pub fn execute(&self, seed: u64) -> Result<Outcome> {
        match self {
            Plan::Certify(p) => p.execute(seed),
            Plan::Decay(p) => p.execute(seed),
            Plan::Regularize(p) => p.execute(),
            Plan::Entropy(p) => p.execute(),
            Plan::Oseen(p) => p.execute(),
            Plan::Vfp(p) => p.execute(),
            Plan::Tensor(p) => p.execute(seed),
        }
    }
}
