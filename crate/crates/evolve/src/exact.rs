use spectral_core::C64;

use crate::{EvolveError, Result, Trajectory};

const OMEGA0: f64 = 0.866_025_403_784_438_6;

/// Exact solution of `∂_t h = ∂_v²h − v∂_v h − v∂_x h + x∂_v h` in `L²(γ⊗γ)` for data
/// `h₀ = Σ_j g_j e^{iξ_j x}`.
///
/// Each plane wave evolves as `h_ξ(t) = exp(iξ(P(t)x + Q(t)v) − ξ²R(t))` with
/// `P'' + P' + P = 0`, `P(0) = 1`, `P'(0) = 0`, `Q = P'` and `R = ∫₀ᵗ Q²`, and
/// `⟨h_ξ, h_η⟩ = exp(−(ξ−η)²(P²+Q²)/2 − (ξ²+η²)R)`.
#[derive(Clone, Debug)]
pub struct PlaneWaveSolution {
    pub freqs: Vec<f64>,
    pub weights: Vec<f64>,
}

/// `(P, Q, R)` at time `t`.
pub fn pqr(t: f64) -> (f64, f64, f64) {
    let decay = (-0.5 * t).exp();
    let (s, c) = (OMEGA0 * t).sin_cos();
    let p = decay * (c + s / (2.0 * OMEGA0));
    let q = -decay * s / OMEGA0;
    (p, q, r_integral(t))
}

/// `∫₀ᵗ Q²` by its Taylor series (no cancellation as `t → 0`) for `t ≤ 2`, closed form beyond.
fn r_integral(t: f64) -> f64 {
    if t <= 2.0 {
        const N: usize = 60;
        let mut q = [0.0f64; N];
        q[1] = -1.0;
        for n in 0..N - 2 {
            q[n + 2] = (-(n as f64 + 1.0) * q[n + 1] - q[n]) / ((n as f64 + 2.0) * (n as f64 + 1.0));
        }
        let mut sum = 0.0;
        for k in (2..N).rev() {
            let c: f64 = (1..k).map(|i| q[i] * q[k - i]).sum();
            sum = sum * t + c / (k as f64 + 1.0);
        }
        // The loop leaves Σ_k c_k t^{k−2}/(k+1); restore the factor t³.
        sum * t.powi(3)
    } else {
        let w2 = OMEGA0 * OMEGA0;
        let z = C64::new(-1.0, 2.0 * OMEGA0);
        let osc = (((z * t).exp() - 1.0) / z).re;
        ((1.0 - (-t).exp()) - osc) / (2.0 * w2)
    }
}

impl PlaneWaveSolution {
    pub fn new(freqs: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if freqs.len() != weights.len() || freqs.is_empty() {
            return Err(EvolveError::Invalid("one weight per frequency".into()));
        }
        Ok(PlaneWaveSolution { freqs, weights })
    }

    /// `ξ_j = ratio^j ≤ ξ_max`, `g_j = ξ_j^{−s/2}`: an `L²` datum whose derivatives are large
    /// at every scale up to `ξ_max`.
    pub fn rough(s: f64, xi_max: f64, ratio: f64) -> Result<Self> {
        if !(ratio > 1.0 && xi_max >= 1.0 && s >= 0.0) {
            return Err(EvolveError::Invalid("need ratio > 1, ξ_max ≥ 1, s ≥ 0".into()));
        }
        let freqs: Vec<f64> = (0..).map(|j| ratio.powi(j)).take_while(|x| *x <= xi_max).collect();
        let weights = freqs.iter().map(|x| x.powf(-s / 2.0)).collect();
        Self::new(freqs, weights)
    }

    /// `S_{n,n'} = Σ_{j,l} g_j g_l ξ_j^n ξ_l^{n'} ⟨h_{ξ_j}, h_{ξ_l}⟩` for `n, n' ≤ 4`, with `(P, Q)`.
    fn sums(&self, t: f64) -> ([[f64; 5]; 5], f64, f64) {
        let (pp, qq, rr) = pqr(t);
        let rho2 = pp * pp + qq * qq;
        let pows: Vec<[f64; 5]> = self
            .freqs
            .iter()
            .zip(&self.weights)
            .map(|(&x, &g)| [g, g * x, g * x * x, g * x.powi(3), g * x.powi(4)])
            .collect();
        let mut s = [[0.0; 5]; 5];
        for (j, xj) in self.freqs.iter().enumerate() {
            for (l, xl) in self.freqs.iter().enumerate() {
                let k = (-(xj - xl).powi(2) * rho2 / 2.0 - (xj * xj + xl * xl) * rr).exp();
                if k == 0.0 {
                    continue;
                }
                for a in 0..5 {
                    for b in 0..5 {
                        s[a][b] += pows[j][a] * pows[l][b] * k;
                    }
                }
            }
        }
        (s, pp, qq)
    }

    fn moment_from(sums: &([[f64; 5]; 5], f64, f64), (p, q): (u32, u32), (p2, q2): (u32, u32)) -> C64 {
        let (s, pp, qq) = sums;
        let (n1, n2) = (p + q, p2 + q2);
        let i = C64::new(0.0, 1.0);
        i.powu(n1) * i.powu(n2).conj() * s[n1 as usize][n2 as usize] * pp.powi((p + p2) as i32) * qq.powi((q + q2) as i32)
    }

    /// `⟨∂_x^p ∂_v^q h, ∂_x^{p'} ∂_v^{q'} h⟩` at time `t`, total orders at most 4.
    pub fn moment(&self, t: f64, d1: (u32, u32), d2: (u32, u32)) -> Result<C64> {
        if d1.0 + d1.1 > 4 || d2.0 + d2.1 > 4 {
            return Err(EvolveError::Invalid("derivative orders above 4 are not tabulated".into()));
        }
        Ok(Self::moment_from(&self.sums(t), d1, d2))
    }

    /// Columns `l2`, `ah = ‖∂_v h‖²`, `ch = ‖∂_x h‖²`, `mixed = Re⟨∂_v h, ∂_x h⟩`, `h1`,
    /// `y2`, `y3`, `y4` (`‖∂_v^j h‖²`) and `w = ‖∂_x∂_v h‖²`.
    pub fn trajectory(&self, times: &[f64]) -> Result<Trajectory> {
        let mut tr = Trajectory::new(times.to_vec())?;
        let sums: Vec<_> = times.iter().map(|&t| self.sums(t)).collect();
        let col = |d1: (u32, u32), d2: (u32, u32)| sums.iter().map(|s| Self::moment_from(s, d1, d2).re).collect::<Vec<f64>>();
        let l2 = col((0, 0), (0, 0));
        let ah = col((0, 1), (0, 1));
        let ch = col((1, 0), (1, 0));
        let h1 = (0..times.len()).map(|i| l2[i] + ah[i] + ch[i]).collect();
        tr.insert("l2", l2)?;
        tr.insert("ah", ah)?;
        tr.insert("ch", ch)?;
        tr.insert("mixed", col((0, 1), (1, 0)))?;
        tr.insert("h1", h1)?;
        tr.insert("y2", col((0, 2), (0, 2)))?;
        tr.insert("y3", col((0, 3), (0, 3)))?;
        tr.insert("y4", col((0, 4), (0, 4)))?;
        tr.insert("w", col((1, 1), (1, 1)))?;
        Ok(tr)
    }
}
