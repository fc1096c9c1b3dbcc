use models::PotentialSpec;

use crate::{EntropicError, GridField, Result};

/// `0.4·min(Δx/v_max, Δv/max|∇V|, Δv²/2)`.
pub fn cfl_bound(grid: &GridField, grad_max: f64) -> f64 {
    let (dx, dv) = (grid.dx(), grid.dv());
    let force = if grad_max > 0.0 { dv / grad_max } else { f64::INFINITY };
    0.4 * (dx / grid.v_max).min(force).min(0.5 * dv * dv)
}

/// `B(z) = z/(e^z − 1)`.
fn bernoulli(z: f64) -> f64 {
    if z.abs() < 1e-12 {
        1.0 - 0.5 * z
    } else {
        z / z.exp_m1()
    }
}

/// One Strang step `T(dt/2) ∘ C(dt) ∘ T(dt/2)` for a fixed potential, with the discrete
/// equilibrium `g_ij = e^{−V_i − v_j²/2}` built in.
///
/// Transport is in flux form for `h = f/g`: upwind fluxes `w·h` across cell faces with face
/// weights `ρ_{i+1/2}M_j` and `ρ_i M_{j+1/2}` (geometric means). The velocity and force
/// entering the fluxes are the discrete logarithmic derivatives of `M` and `ρ`, so that
/// `g` is divergence free. Each half step is SSP-RK2, a convex combination of substochastic
/// updates. The collision step is implicit Euler with Chang–Cooper (Scharfetter–Gummel)
/// face fluxes `B(δ_j)f_j − B(−δ_j)f_{j+1}` and no flux through `|v| = v_max`.
#[derive(Clone, Debug)]
pub struct FpSolver {
    nx: usize,
    nv: usize,
    pub dt: f64,
    pub cfl: f64,
    rho: Vec<f64>,
    rho_face: Vec<f64>,
    m: Vec<f64>,
    /// Signed x-face weights `ṽ_j M_j / Δx`.
    cx: Vec<f64>,
    /// Signed v-face weights `ã_i ρ_i / Δv`, times `M_{j+1/2}` per face.
    cv: Vec<f64>,
    m_face: Vec<f64>,
    out_rate: Vec<f64>,
    lower: Vec<f64>,
    upper_mod: Vec<f64>,
    inv_den: Vec<f64>,
}

impl FpSolver {
    /// `samples[i] = V(x_i)`; `grad_max` bounds `|∇V|` for the stability condition.
    pub fn new(grid: &GridField, samples: &[f64], grad_max: f64, dt: f64) -> Result<Self> {
        let (nx, nv) = (grid.nx, grid.nv);
        if samples.len() != nx || samples.iter().any(|s| !s.is_finite()) {
            return Err(EntropicError::Invalid("one finite potential sample per x-node".into()));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(EntropicError::Invalid(format!("dt = {dt} must be positive")));
        }
        let cfl = cfl_bound(grid, grad_max);
        if dt > cfl {
            return Err(EntropicError::Cfl { dt, bound: cfl });
        }
        let (dx, dv) = (grid.dx(), grid.dv());
        let vmin = samples.iter().cloned().fold(f64::INFINITY, f64::min);
        let rho: Vec<f64> = samples.iter().map(|s| (vmin - s).exp()).collect();
        let rho_face: Vec<f64> = (0..nx).map(|i| (vmin - 0.5 * (samples[i] + samples[(i + 1) % nx])).exp()).collect();
        let vs: Vec<f64> = (0..nv).map(|j| grid.v(j)).collect();
        let m: Vec<f64> = vs.iter().map(|v| (-0.5 * v * v).exp()).collect();
        let m_face: Vec<f64> = (0..nv - 1).map(|j| (-0.25 * (vs[j] * vs[j] + vs[j + 1] * vs[j + 1])).exp()).collect();
        let face = |j: isize| if j < 0 || j as usize >= nv - 1 { 0.0 } else { m_face[j as usize] };
        // ṽ_j M_j = −(M_{j+1/2} − M_{j−1/2})/Δv and ã_i ρ_i = (ρ_{i+1/2} − ρ_{i−1/2})/Δx.
        let cx: Vec<f64> = (0..nv).map(|j| -(face(j as isize) - face(j as isize - 1)) / (dv * dx)).collect();
        let cv: Vec<f64> = (0..nx).map(|i| (rho_face[i] - rho_face[(i + nx - 1) % nx]) / (dx * dv)).collect();

        let mut out_rate = vec![0.0; nx * nv];
        for i in 0..nx {
            let im = (i + nx - 1) % nx;
            for j in 0..nv {
                let mut r = if cx[j] > 0.0 { rho_face[i] * cx[j] } else { -rho_face[im] * cx[j] };
                if cv[i] > 0.0 && j + 1 < nv {
                    r += cv[i] * m_face[j];
                } else if cv[i] < 0.0 && j > 0 {
                    r -= cv[i] * m_face[j - 1];
                }
                out_rate[i * nv + j] = r / (rho[i] * m[j]);
            }
        }
        let rate = out_rate.iter().cloned().fold(0.0, f64::max);
        if 0.5 * dt * rate > 1.0 {
            return Err(EntropicError::Cfl { dt, bound: 2.0 / rate });
        }

        let r = dt / (dv * dv);
        let delta: Vec<f64> = (0..nv - 1).map(|j| 0.5 * (vs[j + 1] * vs[j + 1] - vs[j] * vs[j])).collect();
        let lower: Vec<f64> = (0..nv).map(|j| if j == 0 { 0.0 } else { -r * bernoulli(delta[j - 1]) }).collect();
        let upper: Vec<f64> = (0..nv).map(|j| if j + 1 == nv { 0.0 } else { -r * bernoulli(-delta[j]) }).collect();
        let diag: Vec<f64> = (0..nv)
            .map(|j| {
                let up = if j + 1 < nv { bernoulli(delta[j]) } else { 0.0 };
                let down = if j > 0 { bernoulli(-delta[j - 1]) } else { 0.0 };
                1.0 + r * (up + down)
            })
            .collect();
        let mut upper_mod = vec![0.0; nv];
        let mut inv_den = vec![0.0; nv];
        for j in 0..nv {
            let den = diag[j] - if j > 0 { lower[j] * upper_mod[j - 1] } else { 0.0 };
            inv_den[j] = 1.0 / den;
            upper_mod[j] = upper[j] * inv_den[j];
        }
        Ok(FpSolver { nx, nv, dt, cfl, rho, rho_face, m, cx, cv, m_face, out_rate, lower, upper_mod, inv_den })
    }

    /// Largest per-cell outflow rate of the transport generator.
    pub fn transport_rate(&self) -> f64 {
        self.out_rate.iter().cloned().fold(0.0, f64::max)
    }

    /// One explicit Euler substep of length `tau`, written as `f(1 − τ·out) + τ·in`.
    fn euler(&self, f: &[f64], tau: f64, h: &mut [f64], inflow: &mut [f64], out: &mut [f64]) {
        let (nx, nv) = (self.nx, self.nv);
        for i in 0..nx {
            for j in 0..nv {
                h[i * nv + j] = f[i * nv + j] / (self.rho[i] * self.m[j]);
            }
        }
        inflow.fill(0.0);
        for i in 0..nx {
            let ip = (i + 1) % nx;
            for j in 0..nv {
                let w = self.rho_face[i] * self.cx[j];
                if w > 0.0 {
                    inflow[ip * nv + j] += w * h[i * nv + j];
                } else if w < 0.0 {
                    inflow[i * nv + j] -= w * h[ip * nv + j];
                }
            }
            let c = self.cv[i];
            for j in 0..nv - 1 {
                let w = c * self.m_face[j];
                if w > 0.0 {
                    inflow[i * nv + j + 1] += w * h[i * nv + j];
                } else if w < 0.0 {
                    inflow[i * nv + j] -= w * h[i * nv + j + 1];
                }
            }
        }
        for k in 0..nx * nv {
            out[k] = f[k] * (1.0 - tau * self.out_rate[k]) + tau * inflow[k];
        }
    }

    fn transport(&self, f: &mut [f64], tau: f64) {
        let n = f.len();
        let (mut h, mut inflow) = (vec![0.0; n], vec![0.0; n]);
        let (mut f1, mut f2) = (vec![0.0; n], vec![0.0; n]);
        self.euler(f, tau, &mut h, &mut inflow, &mut f1);
        self.euler(&f1, tau, &mut h, &mut inflow, &mut f2);
        for k in 0..n {
            f[k] = 0.5 * (f[k] + f2[k]);
        }
    }

    fn collide(&self, f: &mut [f64]) {
        let nv = self.nv;
        for row in f.chunks_mut(nv) {
            row[0] *= self.inv_den[0];
            for j in 1..nv {
                row[j] = (row[j] - self.lower[j] * row[j - 1]) * self.inv_den[j];
            }
            for j in (0..nv - 1).rev() {
                row[j] -= self.upper_mod[j] * row[j + 1];
            }
        }
    }

    pub fn step(&self, f: &mut GridField) -> Result<()> {
        if f.nx != self.nx || f.nv != self.nv {
            return Err(EntropicError::Invalid("field and solver grids differ".into()));
        }
        let mass = f.mass();
        if !(mass > 0.0) {
            return Err(EntropicError::Mass(mass));
        }
        self.transport(&mut f.values, 0.5 * self.dt);
        self.collide(&mut f.values);
        self.transport(&mut f.values, 0.5 * self.dt);
        Ok(())
    }
}

/// One step for the periodic potential `V`.
pub fn grid_step_fp(f: &GridField, potential: &PotentialSpec, dt: f64) -> Result<GridField> {
    let samples = f.sample_potential(potential)?;
    let grad_max = (0..f.nx).map(|i| potential.grad(f.x(i)).abs()).fold(0.0, f64::max);
    let mut out = f.clone();
    FpSolver::new(f, &samples, grad_max, dt)?.step(&mut out)?;
    Ok(out)
}

/// One step for a potential given by its node values; `max|∇V|` is taken from centered
/// differences.
pub fn grid_step_sampled(f: &GridField, samples: &[f64], dt: f64) -> Result<GridField> {
    let n = samples.len();
    if n != f.nx {
        return Err(EntropicError::Invalid("one potential sample per x-node".into()));
    }
    let grad_max = (0..n)
        .map(|i| ((samples[(i + 1) % n] - samples[(i + n - 1) % n]) / (2.0 * f.dx())).abs())
        .fold(0.0, f64::max);
    let mut out = f.clone();
    FpSolver::new(f, samples, grad_max, dt)?.step(&mut out)?;
    Ok(out)
}
