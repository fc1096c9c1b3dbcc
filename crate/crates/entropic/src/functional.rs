use models::PotentialSpec;

use crate::{EntropicError, GridField, Result};

/// Floor applied to `h = f/f_∞` before taking logarithms or dividing.
pub const LOG_FLOOR: f64 = 1e-300;

/// Constant-coefficient form `S = [[a₀, b₀], [b₀, a₁]]` acting on `(∇_v u, ∇_x u)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ladder {
    pub a0: f64,
    pub b0: f64,
    pub a1: f64,
}

impl Ladder {
    pub fn new(a0: f64, b0: f64, a1: f64) -> Self {
        Ladder { a0, b0, a1 }
    }

    /// Requires `a₀, a₁ ≥ 0` and `b₀² ≤ δ·a₀a₁` with `δ ∈ (0, 1]`.
    pub fn validate(&self, delta: f64) -> Result<()> {
        let Ladder { a0, b0, a1 } = *self;
        if ![a0, b0, a1, delta].iter().all(|v| v.is_finite()) || a0 < 0.0 || a1 < 0.0 {
            return Err(EntropicError::Ladder(format!("{self:?} needs finite a₀, a₁ ≥ 0")));
        }
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(EntropicError::Ladder(format!("δ = {delta} outside (0, 1]")));
        }
        if b0 * b0 > delta * a0 * a1 {
            return Err(EntropicError::Ladder(format!("b₀² = {:e} exceeds δ·a₀a₁ = {:e}", b0 * b0, delta * a0 * a1)));
        }
        Ok(())
    }

    /// Smallest eigenvalue `K` of `S`, so `⟨Sξ, ξ⟩ ≥ K|ξ|²`.
    pub fn s_min(&self) -> f64 {
        let Ladder { a0, b0, a1 } = *self;
        0.5 * ((a0 + a1) - ((a0 - a1).powi(2) + 4.0 * b0 * b0).sqrt())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EntropyReport {
    /// `H = ∫ h log h dμ`.
    pub h: f64,
    /// `∫ |∇_v h|²/h dμ`.
    pub i_v: f64,
    /// `∫ |∇_x h|²/h dμ`.
    pub i_x: f64,
    /// `∫ ∇_v h·∇_x h / h dμ`.
    pub mixed: f64,
    /// `I = I_v + I_x`.
    pub fisher: f64,
    /// `∫⟨S∇h, ∇h⟩/h dμ`; zero without a ladder.
    pub distorted: f64,
    /// `H + distorted`.
    pub total: f64,
    pub ladder: Option<Ladder>,
    /// Smallest eigenvalue of `S` (zero without a ladder).
    pub s_min: f64,
}

/// `H` and the Fisher parts for `f` normalized to unit mass against the discrete equilibrium.
/// Gradients of `h` are centered differences (periodic in `x`, one-sided at `|v| = v_max`).
pub fn entropy_and_fisher(f: &GridField, potential: &PotentialSpec) -> Result<EntropyReport> {
    let mass = f.mass();
    if !(mass > 0.0) || !mass.is_finite() {
        return Err(EntropicError::Mass(mass));
    }
    if f.values.iter().any(|v| *v < 0.0) {
        return Err(EntropicError::Invalid("density has negative samples".into()));
    }
    let mu = GridField::equilibrium(f.nx, f.nv, f.v_max, potential)?;
    if !mu.same_grid(f) {
        return Err(EntropicError::Invalid("potential period does not match the grid".into()));
    }
    let (nx, nv, w) = (f.nx, f.nv, f.weight());
    let h: Vec<f64> = f.values.iter().zip(&mu.values).map(|(a, g)| (a / mass / g).max(LOG_FLOOR)).collect();
    let ent: f64 = f.values.iter().zip(&h).map(|(a, hh)| if *a > 0.0 { a / mass * hh.ln() } else { 0.0 }).sum::<f64>() * w;
    let (dx, dv) = (f.dx(), f.dv());
    let (mut iv, mut ix, mut mx) = (0.0, 0.0, 0.0);
    for i in 0..nx {
        let (ip, im) = ((i + 1) % nx, (i + nx - 1) % nx);
        for j in 0..nv {
            let k = i * nv + j;
            let gx = (h[ip * nv + j] - h[im * nv + j]) / (2.0 * dx);
            let gv = if j == 0 {
                (h[k + 1] - h[k]) / dv
            } else if j + 1 == nv {
                (h[k] - h[k - 1]) / dv
            } else {
                (h[k + 1] - h[k - 1]) / (2.0 * dv)
            };
            let q = mu.values[k] / h[k];
            iv += q * gv * gv;
            ix += q * gx * gx;
            mx += q * gv * gx;
        }
    }
    let (i_v, i_x, mixed) = (iv * w, ix * w, mx * w);
    Ok(EntropyReport {
        h: ent,
        i_v,
        i_x,
        mixed,
        fisher: i_v + i_x,
        distorted: 0.0,
        total: ent,
        ladder: None,
        s_min: 0.0,
    })
}

/// `E = H + a₀I_v + 2b₀·mixed + a₁I_x` after checking `b₀² ≤ a₀a₁`.
pub fn distorted_energy(f: &GridField, potential: &PotentialSpec, ladder: &Ladder) -> Result<EntropyReport> {
    ladder.validate(1.0)?;
    let mut r = entropy_and_fisher(f, potential)?;
    r.distorted = ladder.a0 * r.i_v + 2.0 * ladder.b0 * r.mixed + ladder.a1 * r.i_x;
    r.total = r.h + r.distorted;
    r.ladder = Some(*ladder);
    r.s_min = ladder.s_min();
    Ok(r)
}
