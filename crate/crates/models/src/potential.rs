use std::f64::consts::PI;

use crate::{ModelError, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum PotentialKind {
    /// `V(x) = ω x²/2` on the line.
    Quadratic { omega: f64 },
    /// `V(x) = ε₀ cos(2πx/ℓ)` on the torus of length `ℓ`.
    Cosine { amplitude: f64, ell: f64 },
    /// Values at `n` uniform nodes `ℓj/n` of a torus, trigonometrically interpolated.
    Samples { ell: f64, values: Vec<f64> },
}

/// Confining or periodic potential `V` with its first two derivatives.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialSpec {
    pub kind: PotentialKind,
    /// Known constant `c` in `|V''| ≤ c(1 + |V'|)`, when it has a closed form.
    pub growth: Option<f64>,
    /// Trigonometric coefficients `(k, cos_k, sin_k)` for sampled potentials.
    modes: Vec<(f64, f64, f64)>,
}

impl PotentialSpec {
    pub fn quadratic(omega: f64) -> Self {
        PotentialSpec {
            kind: PotentialKind::Quadratic { omega },
            growth: Some(omega),
            modes: Vec::new(),
        }
    }

    pub fn cosine(amplitude: f64, ell: f64) -> Self {
        let k = 2.0 * PI / ell;
        PotentialSpec {
            kind: PotentialKind::Cosine { amplitude, ell },
            growth: Some(amplitude.abs() * k * k),
            modes: Vec::new(),
        }
    }

    /// Flat torus, `V ≡ 0`.
    pub fn flat(ell: f64) -> Self {
        Self::cosine(0.0, ell)
    }

    pub fn samples(ell: f64, values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        if n < 3 {
            return Err(ModelError::Invalid("at least 3 potential samples are needed".into()));
        }
        if values.iter().any(|v| !v.is_finite()) || !(ell > 0.0) {
            return Err(ModelError::Invalid("potential samples must be finite on a positive torus".into()));
        }
        // Real DFT; the Nyquist mode of an even grid is halved so the interpolant is real.
        let mut modes = Vec::new();
        for m in 0..=n / 2 {
            let (mut c, mut s) = (0.0, 0.0);
            for (j, v) in values.iter().enumerate() {
                let th = 2.0 * PI * (m * j) as f64 / n as f64;
                c += v * th.cos();
                s += v * th.sin();
            }
            let scale = if m == 0 || (n % 2 == 0 && m == n / 2) { 1.0 } else { 2.0 } / n as f64;
            modes.push((2.0 * PI * m as f64 / ell, c * scale, s * scale));
        }
        Ok(PotentialSpec {
            kind: PotentialKind::Samples { ell, values },
            growth: None,
            modes,
        })
    }

    /// Parses whitespace-separated `node value` lines on a uniform torus grid starting at 0.
    pub fn from_two_column(text: &str, ell: f64) -> Result<Self> {
        let mut nodes = Vec::new();
        let mut values = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split_whitespace().collect();
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| ModelError::Invalid(format!("line {}: bad number {s:?}", ln + 1)))
            };
            if cols.len() != 2 {
                return Err(ModelError::Invalid(format!("line {}: expected two columns", ln + 1)));
            }
            nodes.push(parse(cols[0])?);
            values.push(parse(cols[1])?);
        }
        let n = nodes.len() as f64;
        for (j, x) in nodes.iter().enumerate() {
            if (x - ell * j as f64 / n).abs() > 1e-9 * ell {
                return Err(ModelError::Invalid(format!("node {j} is not on the uniform grid ℓj/n")));
            }
        }
        Self::samples(ell, values)
    }

    pub fn is_periodic(&self) -> bool {
        !matches!(self.kind, PotentialKind::Quadratic { .. })
    }

    pub fn torus_length(&self) -> Option<f64> {
        match &self.kind {
            PotentialKind::Quadratic { .. } => None,
            PotentialKind::Cosine { ell, .. } | PotentialKind::Samples { ell, .. } => Some(*ell),
        }
    }

    /// `V^{(order)}(x)` for `order ∈ {0, 1, 2}`.
    fn eval(&self, x: f64, order: u32) -> f64 {
        match &self.kind {
            PotentialKind::Quadratic { omega } => match order {
                0 => 0.5 * omega * x * x,
                1 => omega * x,
                _ => *omega,
            },
            PotentialKind::Cosine { amplitude, ell } => {
                let k = 2.0 * PI / ell;
                let th = k * x;
                amplitude
                    * match order {
                        0 => th.cos(),
                        1 => -k * th.sin(),
                        _ => -k * k * th.cos(),
                    }
            }
            PotentialKind::Samples { .. } => self
                .modes
                .iter()
                .map(|&(k, c, s)| {
                    let (sn, cs) = (k * x).sin_cos();
                    match order {
                        0 => c * cs + s * sn,
                        1 => k * (s * cs - c * sn),
                        _ => -k * k * (c * cs + s * sn),
                    }
                })
                .sum(),
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        self.eval(x, 0)
    }

    pub fn grad(&self, x: f64) -> f64 {
        self.eval(x, 1)
    }

    pub fn hess(&self, x: f64) -> f64 {
        self.eval(x, 2)
    }
}

/// `max |V''|/(1 + |V'|)` over `n` uniform points of `[lo, hi]`.
pub fn check_growth_condition(potential: &PotentialSpec, lo: f64, hi: f64, n: usize) -> Result<f64> {
    if n < 2 || !(hi > lo) {
        return Err(ModelError::Invalid("sample box must have hi > lo and n ≥ 2".into()));
    }
    let mut c = 0.0f64;
    for i in 0..n {
        let x = lo + (hi - lo) * i as f64 / (n - 1) as f64;
        let (g, h) = (potential.grad(x), potential.hess(x));
        if !g.is_finite() || !h.is_finite() {
            return Err(ModelError::Invalid(format!("potential evaluator failed at x = {x}")));
        }
        c = c.max(h.abs() / (1.0 + g.abs()));
    }
    Ok(c)
}
