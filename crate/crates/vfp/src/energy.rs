use crate::{CouplingSpec, Result, VfpError, VfpState};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FreeEnergy {
    /// `E(f) = ∫ f log f + ∫ f|v|²/2 + ½∬ρρW`.
    pub total: f64,
    pub entropy: f64,
    pub kinetic: f64,
    pub interaction: f64,
    /// `E(f_∞)` for `f_∞ = M/ℓ` on the same grid.
    pub e_inf: f64,
    /// `E(f) − E(Πf) = ∫ f log(f/ρM)`.
    pub local: f64,
    /// `E(Πf) − E(f_∞) = ∫ ρ log(ρℓ) + ½∬ρρW`.
    pub macroscopic: f64,
}

impl FreeEnergy {
    /// `E(f) − E(f_∞)`, summed as `local + macroscopic` to avoid cancellation near `f_∞`.
    pub fn relative(&self) -> f64 {
        self.local + self.macroscopic
    }
}

fn xlogx(x: f64) -> f64 {
    if x > 0.0 {
        x * x.ln()
    } else {
        0.0
    }
}

/// Quadrature of the free energy and its split through `Πf = ρM` (discrete Maxwellian `M`).
pub fn free_energy(state: &VfpState, w: &CouplingSpec) -> Result<FreeEnergy> {
    state.check_coupling(w)?;
    let f = &state.f;
    let mass = f.mass();
    if !(mass > 0.0) {
        return Err(VfpError::Invalid(format!("mass {mass} must be positive")));
    }
    let (nx, nv, wt, dx) = (f.nx, f.nv, f.weight(), f.dx());
    let vs: Vec<f64> = (0..nv).map(|j| f.v(j)).collect();
    let zm: f64 = vs.iter().map(|v| (-0.5 * v * v).exp()).sum::<f64>() * f.dv();
    let m: Vec<f64> = vs.iter().map(|v| (-0.5 * v * v).exp() / zm).collect();
    let rho = f.density();
    let (phi, _) = w.potential_and_force(&rho, dx);

    let entropy = f.values.iter().map(|&p| xlogx(p)).sum::<f64>() * wt;
    let kinetic: f64 = (0..nx).map(|i| (0..nv).map(|j| f.at(i, j) * 0.5 * vs[j] * vs[j]).sum::<f64>()).sum::<f64>() * wt;
    let interaction = 0.5 * rho.iter().zip(&phi).map(|(r, p)| r * p).sum::<f64>() * dx;
    let mut local = 0.0;
    for i in 0..nx {
        for j in 0..nv {
            let p = f.at(i, j);
            if p > 0.0 {
                local += p * (p / (rho[i] * m[j])).ln();
            }
        }
    }
    local *= wt;
    let macroscopic = rho.iter().map(|r| xlogx(*r) + r * f.ell.ln()).sum::<f64>() * dx + interaction;
    let inf = |j: usize| m[j] / f.ell;
    let e_inf = (0..nv).map(|j| xlogx(inf(j)) + inf(j) * 0.5 * vs[j] * vs[j]).sum::<f64>() * wt * nx as f64;
    Ok(FreeEnergy { total: entropy + kinetic + interaction, entropy, kinetic, interaction, e_inf, local, macroscopic })
}
