use std::f64::consts::PI;

use evolve::Trajectory;
use models::PotentialSpec;

use crate::functional::LOG_FLOOR;
use crate::{distorted_energy, cfl_bound, EntropicError, FpSolver, GridField, Ladder, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InitialDatum {
    /// `(1 + m·cos(2πx/ℓ))·e^{−(v−s)²/2}`.
    Smooth { modulation: f64, shift: f64 },
    /// `f_∞·(1 + j·sgn(cos(2πx/ℓ))·sgn(v))`: finite entropy, infinite Fisher information.
    Rough { jump: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecaySpec {
    pub nx: usize,
    pub nv: usize,
    pub v_max: f64,
    /// `V(x) = amplitude·cos(2πx/ℓ)`.
    pub amplitude: f64,
    pub ell: f64,
    pub t_end: f64,
    pub sample_every: f64,
    pub ladder: Ladder,
    pub initial: InitialDatum,
}

impl DecaySpec {
    pub fn potential(&self) -> PotentialSpec {
        PotentialSpec::cosine(self.amplitude, self.ell)
    }

    pub fn initial_field(&self) -> Result<GridField> {
        let k = 2.0 * PI / self.ell;
        let mut f = match self.initial {
            InitialDatum::Smooth { modulation, shift } => {
                if modulation.abs() >= 1.0 {
                    return Err(EntropicError::Invalid("modulation must lie in (−1, 1)".into()));
                }
                GridField::from_fn(self.nx, self.nv, self.ell, self.v_max, |x, v| {
                    (1.0 + modulation * (k * x).cos()) * (-0.5 * (v - shift).powi(2)).exp()
                })?
            }
            InitialDatum::Rough { jump } => {
                if jump.abs() >= 1.0 {
                    return Err(EntropicError::Invalid("jump must lie in (−1, 1)".into()));
                }
                let mut f = GridField::equilibrium(self.nx, self.nv, self.v_max, &self.potential())?;
                for i in 0..f.nx {
                    let sx = (k * f.x(i)).cos().signum();
                    for j in 0..f.nv {
                        let sv = if f.v(j) == 0.0 { 0.0 } else { f.v(j).signum() };
                        f.values[i * f.nv + j] *= 1.0 + jump * sx * sv;
                    }
                }
                f
            }
        };
        f.normalize()?;
        Ok(f)
    }
}

#[derive(Clone, Debug)]
pub struct DecayRun {
    /// Columns `entropy`, `fisher_v`, `fisher_x`, `mixed`, `energy`, `mass`.
    pub trajectory: Trajectory,
    pub dt: f64,
    pub steps: usize,
    /// Largest one-step increase of `H`.
    pub max_entropy_increase: f64,
    /// Largest `|mass − 1|` over all steps.
    pub max_mass_drift: f64,
    pub min_value: f64,
    pub final_field: GridField,
}

fn relative_entropy(f: &GridField, mu: &GridField) -> f64 {
    let m = f.mass();
    f.values
        .iter()
        .zip(&mu.values)
        .map(|(a, g)| if *a > 0.0 { a / m * (a / m / g).max(LOG_FLOOR).ln() } else { 0.0 })
        .sum::<f64>()
        * f.weight()
}

/// Runs the grid solver to `t_end`, sampling the functionals every `sample_every` and
/// checking the one-step entropy decrease after every step.
pub fn entropy_decay(spec: &DecaySpec) -> Result<DecayRun> {
    if !(spec.t_end > 0.0 && spec.sample_every > 0.0 && spec.sample_every <= spec.t_end) {
        return Err(EntropicError::Invalid("need 0 < sample_every ≤ t_end".into()));
    }
    spec.ladder.validate(1.0)?;
    let pot = spec.potential();
    let mut f = spec.initial_field()?;
    let mu = GridField::equilibrium(spec.nx, spec.nv, spec.v_max, &pot)?;
    let samples = f.sample_potential(&pot)?;
    let grad_max = (0..f.nx).map(|i| pot.grad(f.x(i)).abs()).fold(0.0, f64::max);
    let bound = cfl_bound(&f, grad_max);
    let per_sample = (spec.sample_every / bound * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    let dt = spec.sample_every / per_sample as f64;
    let solver = FpSolver::new(&f, &samples, grad_max, dt)?;
    let n_samples = (spec.t_end / spec.sample_every).round() as usize;

    let mut times = Vec::with_capacity(n_samples + 1);
    let mut cols: [Vec<f64>; 6] = Default::default();
    let mut record = |t: f64, f: &GridField| -> Result<()> {
        let r = distorted_energy(f, &pot, &spec.ladder)?;
        times.push(t);
        for (c, v) in cols.iter_mut().zip([r.h, r.i_v, r.i_x, r.mixed, r.total, f.mass()]) {
            c.push(v);
        }
        Ok(())
    };
    record(0.0, &f)?;
    let mut h_prev = relative_entropy(&f, &mu);
    let (mut max_inc, mut drift, mut min_value) = (f64::NEG_INFINITY, 0.0f64, f64::INFINITY);
    for s in 1..=n_samples {
        for _ in 0..per_sample {
            solver.step(&mut f)?;
            let h = relative_entropy(&f, &mu);
            max_inc = max_inc.max(h - h_prev);
            h_prev = h;
            drift = drift.max((f.mass() - 1.0).abs());
            min_value = min_value.min(f.values.iter().cloned().fold(f64::INFINITY, f64::min));
        }
        record(s as f64 * spec.sample_every, &f)?;
    }
    let mut trajectory = Trajectory::new(times)?;
    for (name, c) in ["entropy", "fisher_v", "fisher_x", "mixed", "energy", "mass"].iter().zip(cols) {
        trajectory.insert(name, c)?;
    }
    Ok(DecayRun {
        trajectory,
        dt,
        steps: n_samples * per_sample,
        max_entropy_increase: max_inc,
        max_mass_drift: drift,
        min_value,
        final_field: f,
    })
}
