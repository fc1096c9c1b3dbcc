use certify::{coercivity_check, commutator_chain, part_one_ladder, Principal};
use evolve::{fit_rate, herau_check, propagate, FitKind, Functionals, PlaneWaveSolution, Scheme, SchemeUsed};
use models::{build_kfp, PotentialSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spectral_core::{CVec, Factor, C64};

fn factorial_sqrt(n: usize) -> f64 {
    (1..=n).map(|k| (k as f64).sqrt()).product()
}

/// The spectral solver and the closed-form plane wave agree for a smooth datum `e^{iξx}`.
#[test]
fn spectral_solver_matches_plane_wave() {
    let n = 30;
    let m = build_kfp(&PotentialSpec::quadratic(1.0), n, n).unwrap();
    let xi = 0.8;
    let ix = m.basis.factor_index(Factor::X);
    let mut h0 = CVec::zeros(m.basis.dim());
    for k in 0..n {
        let mut multi = vec![0; 2];
        multi[ix] = k;
        let c = C64::new(0.0, xi).powu(k as u32) * ((-xi * xi / 2.0).exp() / factorial_sqrt(k));
        h0[m.basis.flat(&multi)] = c;
    }
    let ch = commutator_chain(&m, 1, &Principal::kinetic(&m)).unwrap();
    let f = Functionals { chain: ch.c.clone(), ..Default::default() };
    let times = [0.0, 0.25, 0.5, 1.0, 2.0];
    // The kernel component is the constant mode; the closed form keeps it, so do not remove it.
    let p = propagate(&m.l, &h0, &[], &times, Scheme::Eig, &f).unwrap();
    assert!(matches!(p.scheme, SchemeUsed::Eig { .. }), "{:?}", p.scheme);
    let exact = PlaneWaveSolution::new(vec![xi], vec![1.0]).unwrap().trajectory(&times).unwrap();
    for name in ["l2", "ah", "ch", "mixed"] {
        let (a, b) = (p.trajectory.get(name).unwrap(), exact.get(name).unwrap());
        for i in 0..times.len() {
            assert!((a[i] - b[i]).abs() < 1e-10, "{name} at t = {}: {} vs {}", times[i], a[i], b[i]);
        }
    }
}

fn generic_state(dim: usize, seed: u64) -> CVec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    CVec::from_fn(dim, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

#[test]
fn quadratic_model_decays_at_one_half() {
    let m = build_kfp(&PotentialSpec::quadratic(1.0), 24, 24).unwrap();
    let ch = commutator_chain(&m, 1, &Principal::kinetic(&m)).unwrap();
    let ladder = part_one_ladder(0.05, 2).unwrap();
    let f = Functionals { chain: ch.c.clone(), twist: Some(ladder.clone()), extras: vec![] };
    let times: Vec<f64> = (0..=400).map(|i| i as f64 * 0.1).collect();
    let h0 = generic_state(m.basis.dim(), 3);
    let p = propagate(&m.l, &h0, &m.kernel(), &times, Scheme::Eig, &f).unwrap();
    assert!(p.kernel_component > 0.0);
    let tr = &p.trajectory;
    assert!(tr.max_increase("l2").unwrap() <= 1e-10);
    let fit = fit_rate(tr, "h1", FitKind::Exponential, (20.0, 40.0)).unwrap();
    assert!((fit.rate / 2.0 - 0.5).abs() < 0.05, "{fit:?}");

    let k = coercivity_check(&m, &ch, &ladder).unwrap();
    assert!(k.k > 0.0 && k.k_twisted > 0.0, "{k:?}");
    let tw = tr.get("twisted").unwrap();
    for (i, &t) in times.iter().enumerate() {
        assert!(tw[i] <= tw[0] * (-2.0 * (k.k_twisted - 0.005) * t).exp() * (1.0 + 1e-9));
    }
}

#[test]
fn rough_data_short_time_exponents() {
    let s = 0.02;
    let sol = PlaneWaveSolution::rough(s, 1e7, 1.25).unwrap();
    let times: Vec<f64> = (0..=40).map(|i| 1e-3 * 10f64.powf(i as f64 / 20.0)).collect();
    let tr = sol.trajectory(&times).unwrap();
    let dv = fit_rate(&tr, "ah", FitKind::PowerLaw, (1e-3, 1e-1)).unwrap();
    let dx = fit_rate(&tr, "ch", FitKind::PowerLaw, (1e-3, 1e-1)).unwrap();
    assert!((dv.rate / 2.0 + 0.5).abs() <= 0.1, "{dv:?}");
    assert!((dx.rate / 2.0 + 1.5).abs() <= 0.15, "{dx:?}");
}

#[test]
fn herau_functional_is_nonincreasing() {
    let sol = PlaneWaveSolution::rough(0.02, 1e7, 1.25).unwrap();
    let times: Vec<f64> = (0..=10_000).map(|i| i as f64 * 1e-4).collect();
    let tr = sol.trajectory(&times).unwrap();
    let r = herau_check(&tr, 0.1, 0.01, 0.001).unwrap();
    assert!(r.max_violation <= 1e-10, "{}", r.max_violation);
    assert!(r.a_bound_ratio <= 1.0 && r.c_bound_ratio <= 1.0);
}
