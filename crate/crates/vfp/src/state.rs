use entropic::{FpSolver, GridField};

use crate::{CouplingSpec, Result, VfpError};

/// A unit-mass density on the torus × velocity grid.
#[derive(Clone, Debug, PartialEq)]
pub struct VfpState {
    pub f: GridField,
}

impl VfpState {
    pub fn new(f: GridField) -> Result<Self> {
        let m = f.mass();
        if (m - 1.0).abs() > 1e-9 {
            return Err(VfpError::Invalid(format!("mass {m} is not 1")));
        }
        if f.values.iter().any(|v| *v < 0.0) {
            return Err(VfpError::Invalid("negative density".into()));
        }
        Ok(VfpState { f })
    }

    /// `f = M(v)/ℓ` with the discrete Maxwellian.
    pub fn maxwellian(nx: usize, nv: usize, ell: f64, v_max: f64) -> Result<Self> {
        let mut f = GridField::from_fn(nx, nv, ell, v_max, |_, v| (-0.5 * v * v).exp())?;
        f.normalize()?;
        Ok(VfpState { f })
    }

    pub fn density(&self) -> Vec<f64> {
        self.f.density()
    }

    pub(crate) fn check_coupling(&self, w: &CouplingSpec) -> Result<()> {
        if (w.ell - self.f.ell).abs() > 1e-12 * w.ell {
            return Err(VfpError::Invalid(format!("coupling period {} differs from the grid torus {}", w.ell, self.f.ell)));
        }
        Ok(())
    }
}

/// `F = −(∂W) ⋆ ρ` at the x-nodes.
pub fn self_consistent_force(state: &VfpState, w: &CouplingSpec) -> Result<Vec<f64>> {
    state.check_coupling(w)?;
    Ok(w.potential_and_force(&state.density(), state.f.dx()).1)
}

/// One Strang step with the force frozen at `F[f(t)]`. The frozen force is the gradient of
/// `Φ = W ⋆ ρ`, so the step is the grid Fokker–Planck step in the potential `Φ`.
pub fn vfp_step(state: &VfpState, w: &CouplingSpec, dt: f64) -> Result<VfpState> {
    state.check_coupling(w)?;
    let (phi, force) = w.potential_and_force(&state.density(), state.f.dx());
    let fmax = force.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut next = state.clone();
    FpSolver::new(&state.f, &phi, fmax, dt)?.step(&mut next.f)?;
    Ok(next)
}
