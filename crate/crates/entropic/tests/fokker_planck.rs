use std::f64::consts::PI;

use entropic::{
    distorted_energy, entropy_and_fisher, entropy_decay, grid_step_fp, DecaySpec, FpSolver, GridField, InitialDatum, Ladder,
};
use evolve::{fit_rate, FitKind};
use models::PotentialSpec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TWO_PI: f64 = 2.0 * PI;

fn max_dt(f: &GridField, pot: &PotentialSpec) -> f64 {
    let g = (0..f.nx).map(|i| pot.grad(f.x(i)).abs()).fold(0.0, f64::max);
    entropic::cfl_bound(f, g)
}

#[test]
fn equilibrium_is_stationary() {
    let pot = PotentialSpec::cosine(1.0, TWO_PI);
    let eq = GridField::equilibrium(64, 65, 6.0, &pot).unwrap();
    let dt = max_dt(&eq, &pot);
    let mut f = eq.clone();
    for _ in 0..100 {
        let next = grid_step_fp(&f, &pot, dt).unwrap();
        let change = next.values.iter().zip(&f.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let scale = f.values.iter().cloned().fold(0.0, f64::max);
        assert!(change <= 1e-9 * scale, "{change:e}");
        f = next;
    }
}

#[test]
fn flat_potential_relaxes_like_ornstein_uhlenbeck() {
    let pot = PotentialSpec::flat(TWO_PI);
    let t0 = 2.0;
    let mut f = GridField::from_fn(16, 129, TWO_PI, 6.0, |_, v| (-v * v / (2.0 * t0)).exp()).unwrap();
    f.normalize().unwrap();
    let dt = max_dt(&f, &pot);
    let solver = FpSolver::new(&f, &[0.0; 16], 0.0, dt).unwrap();
    let second = |f: &GridField| {
        let rows = f.values.chunks(f.nv);
        rows.map(|r| r.iter().enumerate().map(|(j, p)| p * f.v(j).powi(2)).sum::<f64>()).sum::<f64>() * f.weight()
    };
    let mut prev = second(&f);
    for n in 1..=1500 {
        solver.step(&mut f).unwrap();
        let m2 = second(&f);
        let exact = 1.0 + (t0 - 1.0) * (-2.0 * n as f64 * dt).exp();
        assert!((m2 / exact - 1.0).abs() <= 0.01, "step {n}: {m2} vs {exact}");
        assert!(m2 <= prev + 1e-15);
        prev = m2;
    }
}

#[test]
fn point_bump_stays_nonnegative_and_keeps_its_mass() {
    let pot = PotentialSpec::cosine(1.0, TWO_PI);
    let mut f = GridField::zeros(64, 65, TWO_PI, 6.0).unwrap();
    f.values[20 * 65 + 40] = 1.0;
    f.normalize().unwrap();
    let solver = FpSolver::new(&f, &f.sample_potential(&pot).unwrap(), 1.0, max_dt(&f, &pot)).unwrap();
    for _ in 0..1000 {
        solver.step(&mut f).unwrap();
        assert!((f.mass() - 1.0).abs() <= 1e-12);
    }
    assert!(f.values.iter().all(|v| *v >= 0.0));
}

#[test]
fn gaussian_temperature_entropy() {
    let pot = PotentialSpec::cosine(0.5, TWO_PI);
    for &t in &[0.6, 0.8, 1.3, 1.6] {
        let eq = GridField::equilibrium(32, 257, 6.0, &pot).unwrap();
        let mut f = eq.clone();
        for i in 0..f.nx {
            for j in 0..f.nv {
                let v = f.v(j);
                f.values[i * f.nv + j] *= (-v * v * (1.0 / t - 1.0) / 2.0).exp();
            }
        }
        let r = entropy_and_fisher(&f, &pot).unwrap();
        let exact = (t - t.ln() - 1.0) / 2.0;
        assert!((r.h - exact).abs() <= 1e-4, "T = {t}: {} vs {exact}", r.h);
        assert!(r.i_x.abs() < 1e-12 && r.i_v > 0.0);
    }
}

#[test]
fn pinsker_on_random_fields() {
    let pot = PotentialSpec::cosine(1.0, TWO_PI);
    let eq = GridField::equilibrium(32, 33, 6.0, &pot).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..50 {
        let scale = rng.gen_range(0.1..3.0);
        let mut f = eq.clone();
        f.values.iter_mut().for_each(|v| *v *= (scale * rng.gen_range(-1.0..1.0f64)).exp());
        let r = entropy_and_fisher(&f, &pot).unwrap();
        let m = f.mass();
        let l1: f64 = f.values.iter().zip(&eq.values).map(|(a, g)| (a / m - g).abs()).sum::<f64>() * f.weight();
        assert!(r.h >= 0.5 * l1 * l1, "{} < {}", r.h, 0.5 * l1 * l1);
    }
}

#[test]
fn distorted_energy_forms() {
    let pot = PotentialSpec::cosine(1.0, TWO_PI);
    let mut f = GridField::from_fn(32, 65, TWO_PI, 6.0, |x, v| (1.0 + 0.4 * x.sin()) * (-0.5 * (v - 0.7).powi(2)).exp()).unwrap();
    f.normalize().unwrap();
    let base = entropy_and_fisher(&f, &pot).unwrap();
    let dec = distorted_energy(&f, &pot, &Ladder::new(0.3, 0.0, 0.2)).unwrap();
    assert!((dec.total - (base.h + 0.3 * base.i_v + 0.2 * base.i_x)).abs() < 1e-14 * dec.total);
    let tw = distorted_energy(&f, &pot, &Ladder::new(0.3, 0.2, 0.2)).unwrap();
    assert!(tw.distorted >= tw.s_min * tw.fisher);
    assert!(distorted_energy(&f, &pot, &Ladder::new(0.1, 0.2, 0.1)).is_err());
}

fn spec(nx: usize, nv: usize, initial: InitialDatum, t_end: f64, sample_every: f64) -> DecaySpec {
    DecaySpec {
        nx,
        nv,
        v_max: 6.0,
        amplitude: 1.0,
        ell: TWO_PI,
        t_end,
        sample_every,
        ladder: Ladder::new(0.1, 0.05, 0.05),
        initial,
    }
}

#[test]
fn entropy_decays_at_a_grid_independent_rate() {
    let smooth = InitialDatum::Smooth { modulation: 0.5, shift: 1.0 };
    let coarse = entropy_decay(&spec(48, 49, smooth, 5.0, 0.05)).unwrap();
    let fine = entropy_decay(&spec(96, 97, smooth, 5.0, 0.05)).unwrap();
    let mut rates = Vec::new();
    for run in [&coarse, &fine] {
        assert!(run.max_entropy_increase <= 1e-10);
        assert!(run.max_mass_drift <= 1e-12 && run.min_value >= 0.0);
        let e = run.trajectory.require("energy").unwrap();
        assert!(e.windows(2).all(|w| w[1] <= w[0]));
        let fit = fit_rate(&run.trajectory, "energy", FitKind::Exponential, (1.0, 5.0)).unwrap();
        assert!(fit.rate > 0.0 && fit.r2 >= 0.98, "{fit:?}");
        rates.push(fit.rate);
    }
    assert!((rates[1] / rates[0] - 1.0).abs() <= 0.1, "{rates:?}");
}

#[test]
fn rough_data_regularize_at_hypoelliptic_rates() {
    let run = entropy_decay(&spec(64, 65, InitialDatum::Rough { jump: 0.5 }, 0.5, 0.01)).unwrap();
    assert!(run.max_entropy_increase <= 1e-10);
    let iv = fit_rate(&run.trajectory, "fisher_v", FitKind::PowerLaw, (0.01, 0.5)).unwrap();
    let ix = fit_rate(&run.trajectory, "fisher_x", FitKind::PowerLaw, (0.01, 0.5)).unwrap();
    assert!(iv.rate >= -1.2 && ix.rate >= -3.3, "{iv:?} {ix:?}");
    let tr = &run.trajectory;
    let (v, x) = (tr.require("fisher_v").unwrap(), tr.require("fisher_x").unwrap());
    let bounded = |col: &[f64], p: i32| tr.times.iter().zip(col).skip(1).map(|(t, c)| c * t.powi(p)).fold(0.0, f64::max);
    assert!(bounded(v, 1).is_finite() && bounded(x, 3).is_finite());
}
