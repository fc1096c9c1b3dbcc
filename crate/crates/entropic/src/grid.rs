use std::fmt::Write as _;

use models::PotentialSpec;

use crate::{EntropicError, Result};

/// Density samples `f(x_i, v_j)` stored row-major in `x`, i.e. at `values[i·nv + j]`.
///
/// `x_i = i·ell/nx` on the torus, `v_j = −v_max + j·2v_max/(nv−1)`. Every node carries the
/// cell weight `Δx·Δv`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridField {
    pub nx: usize,
    pub nv: usize,
    pub ell: f64,
    pub v_max: f64,
    pub values: Vec<f64>,
}

impl GridField {
    pub fn zeros(nx: usize, nv: usize, ell: f64, v_max: f64) -> Result<Self> {
        if nx < 3 || nv < 3 {
            return Err(EntropicError::Invalid(format!("grid {nx}×{nv} is too small")));
        }
        if !(ell > 0.0 && v_max > 0.0 && ell.is_finite() && v_max.is_finite()) {
            return Err(EntropicError::Invalid("torus length and v_max must be positive".into()));
        }
        Ok(GridField { nx, nv, ell, v_max, values: vec![0.0; nx * nv] })
    }

    pub fn from_fn(nx: usize, nv: usize, ell: f64, v_max: f64, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let mut g = Self::zeros(nx, nv, ell, v_max)?;
        for i in 0..nx {
            for j in 0..nv {
                g.values[i * nv + j] = f(g.x(i), g.v(j));
            }
        }
        if g.values.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(EntropicError::Invalid("density samples must be finite and nonnegative".into()));
        }
        Ok(g)
    }

    /// The discrete equilibrium `e^{−V(x_i) − v_j²/2}`, normalized to unit mass.
    pub fn equilibrium(nx: usize, nv: usize, v_max: f64, potential: &PotentialSpec) -> Result<Self> {
        let ell = torus_length(potential)?;
        let g = Self::zeros(nx, nv, ell, v_max)?;
        let samples = g.sample_potential(potential)?;
        let vmin = samples.iter().cloned().fold(f64::INFINITY, f64::min);
        let mut g = Self::from_fn(nx, nv, ell, v_max, |_, v| (-0.5 * v * v).exp())?;
        for i in 0..nx {
            let r = (vmin - samples[i]).exp();
            g.values[i * nv..(i + 1) * nv].iter_mut().for_each(|v| *v *= r);
        }
        g.normalize()?;
        Ok(g)
    }

    pub fn dx(&self) -> f64 {
        self.ell / self.nx as f64
    }

    pub fn dv(&self) -> f64 {
        2.0 * self.v_max / (self.nv - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.dx()
    }

    pub fn v(&self, j: usize) -> f64 {
        -self.v_max + j as f64 * self.dv()
    }

    pub fn weight(&self) -> f64 {
        self.dx() * self.dv()
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.nv + j]
    }

    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.weight()
    }

    /// `ρ(x_i) = Σ_j f(x_i, v_j)Δv`.
    pub fn density(&self) -> Vec<f64> {
        self.values.chunks(self.nv).map(|r| r.iter().sum::<f64>() * self.dv()).collect()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let m = self.mass();
        if !(m > 0.0) {
            return Err(EntropicError::Mass(m));
        }
        self.values.iter_mut().for_each(|v| *v /= m);
        Ok(())
    }

    pub fn same_grid(&self, other: &GridField) -> bool {
        self.nx == other.nx && self.nv == other.nv && self.ell == other.ell && self.v_max == other.v_max
    }

    /// `V(x_i)` at the grid nodes.
    pub fn sample_potential(&self, potential: &PotentialSpec) -> Result<Vec<f64>> {
        let ell = torus_length(potential)?;
        if (ell - self.ell).abs() > 1e-12 * ell {
            return Err(EntropicError::Invalid(format!("potential period {ell} does not match the grid torus {}", self.ell)));
        }
        Ok((0..self.nx).map(|i| potential.value(self.x(i))).collect())
    }

    /// Flat `x,v,f` CSV.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,v,f\n");
        for i in 0..self.nx {
            for j in 0..self.nv {
                let _ = writeln!(s, "{:e},{:e},{:e}", self.x(i), self.v(j), self.at(i, j));
            }
        }
        s
    }
}

pub(crate) fn torus_length(potential: &PotentialSpec) -> Result<f64> {
    potential
        .torus_length()
        .ok_or_else(|| EntropicError::Invalid("the grid solver needs a periodic potential".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_and_mass() {
        let g = GridField::from_fn(8, 5, 2.0, 1.0, |_, _| 1.0).unwrap();
        assert_eq!(g.v(0), -1.0);
        assert_eq!(g.v(4), 1.0);
        assert_eq!(g.x(4), 1.0);
        assert!((g.mass() - 2.0 * 2.5).abs() < 1e-14);
        assert!(GridField::from_fn(8, 5, 2.0, 1.0, |_, v| v).is_err());
    }

    #[test]
    fn equilibrium_is_normalized_and_rejects_confining_potentials() {
        let eq = GridField::equilibrium(16, 33, 6.0, &PotentialSpec::cosine(1.0, 6.0)).unwrap();
        assert!((eq.mass() - 1.0).abs() < 1e-14);
        assert!(eq.at(0, 16) < eq.at(8, 16));
        assert!(GridField::equilibrium(16, 33, 6.0, &PotentialSpec::quadratic(1.0)).is_err());
    }
}
