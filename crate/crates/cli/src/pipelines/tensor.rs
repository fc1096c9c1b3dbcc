use std::sync::Arc;

use certify::{tensor_gap_bound, tensor_gap_bound_multiplier};
use models::build_tensor_toy;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spectral_core::{build_basis, spectral_gap, BasisSpec, CMat, CVec, LinOp, TensorBasis, C64};

use super::ctx;
use crate::config::{require, Config};
use crate::output::{num, Outcome, Table};
use crate::Result;

/// Random diagonal PSD factors with a one-dimensional kernel, multiplier `|v|`.
#[derive(Clone, Debug)]
pub struct TensorPlan {
    pub samples: usize,
    pub n1: usize,
    pub n2: usize,
    pub lo: f64,
    pub hi: f64,
}

impl TensorPlan {
    pub fn parse(cfg: &Config) -> Result<Self> {
        let p = TensorPlan {
            samples: cfg.usize_or("tensor.samples", 200)?,
            n1: cfg.usize_or("tensor.n1", 6)?,
            n2: cfg.usize_or("tensor.n2", 10)?,
            lo: cfg.f64_or("tensor.diag_lo", 0.2)?,
            hi: cfg.f64_or("tensor.diag_hi", 5.0)?,
        };
        require("tensor.samples", p.samples >= 1, "need at least one sample")?;
        require("tensor.n1", p.n1 >= 2, "need at least 2 modes")?;
        require("tensor.n2", p.n2 >= 2, "need at least 2 modes")?;
        require("tensor.diag_lo", p.lo > 0.0 && p.lo < p.hi, "need 0 < diag_lo < diag_hi")?;
        Ok(p)
    }

    fn factor(&self, rng: &mut ChaCha8Rng, n: usize) -> Result<LinOp> {
        let b = build_basis(BasisSpec::hermite(n, 1.0)).map_err(ctx("basis"))?;
        let basis = Arc::new(TensorBasis::new(vec![b]).map_err(ctx("basis"))?);
        let zero = rng.gen_range(0..n);
        let d = CVec::from_fn(n, |i, _| if i == zero { C64::new(0.0, 0.0) } else { C64::new(rng.gen_range(self.lo..self.hi), 0.0) });
        Ok(LinOp::new(basis, CMat::from_diagonal(&d)))
    }

    pub fn execute(&self, seed: u64) -> Result<Outcome> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut tab = Table::new("toys", &["sample", "gap", "bound", "multiplier_bound", "kappa1", "kappa2", "lambda", "cap_lambda"]);
        let (mut viol, mut viol_mult) = (0usize, 0usize);
        let mut worst = f64::INFINITY;
        for s in 0..self.samples {
            let p1 = self.factor(&mut rng, self.n1)?;
            let p2 = self.factor(&mut rng, self.n2)?;
            let m: Vec<f64> = p2.basis.factors[0].quad().nodes.iter().map(|v| v.abs()).collect();
            let toy = build_tensor_toy(&p1, &p2, &m).map_err(ctx("tensor toy"))?;
            let gap = spectral_gap(&toy.l, &[toy.kernel.clone()]).map_err(ctx("spectral gap"))?;
            let bound = tensor_gap_bound(toy.kappa1, toy.kappa2, toy.lambda, toy.cap_lambda).map_err(ctx("gap bound"))?;
            let mult = tensor_gap_bound_multiplier(toy.kappa1, toy.kappa2, toy.m_l1, toy.m_l2).map_err(ctx("gap bound"))?;
            viol += usize::from(gap < bound * (1.0 - 1e-9));
            viol_mult += usize::from(gap < mult * (1.0 - 1e-9));
            worst = worst.min(gap / bound);
            tab.push(vec![
                s.to_string(),
                num(gap),
                num(bound),
                num(mult),
                num(toy.kappa1),
                num(toy.kappa2),
                num(toy.lambda),
                num(toy.cap_lambda),
            ]);
        }
        let mut out = Outcome::default();
        out.tables.push(tab);
        out.head("samples", self.samples as f64);
        out.head("violations", viol as f64);
        out.head("multiplier_violations", viol_mult as f64);
        out.head("worst_gap_over_bound", worst);
        out.verdict("gap_bound", viol == 0);
        out.verdict("multiplier_bound", viol_mult == 0);
        out.certified = viol == 0 && viol_mult == 0;
        Ok(out)
    }
}
