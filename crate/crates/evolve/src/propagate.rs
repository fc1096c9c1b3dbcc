use std::collections::HashMap;

use nalgebra::{Dyn, Schur, LU};
use spectral_core::{norms, CMat, CVec, LinOp, TwistCoeffs, C64};

use crate::{EvolveError, Result, Trajectory};

/// Largest admissible `‖L − VΛV⁻¹‖/‖L‖` for the eigen scheme.
pub const EIG_RESIDUAL_TOL: f64 = 1e-8;
/// Step used when the eigen scheme falls back to Crank–Nicolson.
const FALLBACK_DT: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Scheme {
    Eig,
    CrankNicolson { dt: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SchemeUsed {
    Eig { residual: f64 },
    CrankNicolson { dt: f64 },
    /// The eigendecomposition failed its residual check.
    Fallback { residual: f64, dt: f64 },
}

/// What to record along the trajectory.
///
/// Columns: `l2 = ‖h‖²`; with a chain `C_0 = A, C_1 = C, …` also `ah = ‖Ah‖²`, `ch = ‖Ch‖²`,
/// `mixed = Re⟨Ah,Ch⟩` and `h1 = ‖h‖² + Σ‖C_j h‖²`; `twisted` when coefficients are given;
/// each extra `(name, T)` as `‖Th‖²`.
#[derive(Clone, Debug, Default)]
pub struct Functionals {
    pub chain: Vec<LinOp>,
    pub twist: Option<TwistCoeffs>,
    pub extras: Vec<(String, LinOp)>,
}

#[derive(Clone, Debug)]
pub struct Propagation {
    pub trajectory: Trajectory,
    pub states: Vec<CVec>,
    /// Norm of the kernel component removed from `h₀`.
    pub kernel_component: f64,
    pub scheme: SchemeUsed,
}

fn orthonormal(kernel: &[CVec]) -> Vec<CVec> {
    let mut out: Vec<CVec> = Vec::new();
    for k in kernel {
        let mut v = k.clone();
        for q in &out {
            v -= q * q.dotc(&v);
        }
        let n = v.norm();
        if n > 1e-12 {
            out.push(v / C64::new(n, 0.0));
        }
    }
    out
}

/// Index sets of the connected components of the sparsity graph of `m`.
fn blocks(m: &CMat) -> Vec<Vec<usize>> {
    let n = m.nrows();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for j in 0..n {
        for i in 0..n {
            if i != j && m[(i, j)] != C64::new(0.0, 0.0) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    let mut out: Vec<Vec<usize>> = groups.into_values().collect();
    out.sort_by_key(|g| g[0]);
    out
}

struct EigBlock {
    idx: Vec<usize>,
    vecs: CMat,
    vals: Vec<C64>,
    inv: CMat,
}

/// Eigenvectors of an upper-triangular `t` by back substitution.
fn triangular_eigenvectors(t: &CMat) -> CMat {
    let n = t.nrows();
    let scale = t.norm().max(1e-300);
    let mut y = CMat::zeros(n, n);
    for k in 0..n {
        y[(k, k)] = C64::new(1.0, 0.0);
        for j in (0..k).rev() {
            let mut s = C64::new(0.0, 0.0);
            for l in j + 1..=k {
                s += t[(j, l)] * y[(l, k)];
            }
            let mut d = t[(j, j)] - t[(k, k)];
            if d.norm() < 1e-14 * scale {
                d = C64::new(1e-14 * scale, 0.0);
            }
            y[(j, k)] = -s / d;
        }
        let nk = y.column(k).norm();
        y.column_mut(k).unscale_mut(nk);
    }
    y
}

fn eig_blocks(l: &CMat) -> Option<(Vec<EigBlock>, f64)> {
    let scale = l.norm().max(1e-300);
    let mut out = Vec::new();
    let mut res2 = 0.0;
    for idx in blocks(l) {
        let m = idx.len();
        let sub = CMat::from_fn(m, m, |i, j| l[(idx[i], idx[j])]);
        let (q, t) = Schur::try_new(sub.clone(), 1e-15, 100_000)?.unpack();
        let vecs = &q * triangular_eigenvectors(&t);
        let inv = vecs.clone().try_inverse()?;
        let vals: Vec<C64> = (0..m).map(|i| t[(i, i)]).collect();
        let recon = &vecs * CMat::from_diagonal(&nalgebra::DVector::from_vec(vals.clone())) * &inv;
        res2 += (recon - sub).norm_squared();
        out.push(EigBlock { idx, vecs, vals, inv });
    }
    Some((out, res2.sqrt() / scale))
}

fn eig_states(blocks: &[EigBlock], h0: &CVec, times: &[f64]) -> Vec<CVec> {
    let coeffs: Vec<CVec> = blocks
        .iter()
        .map(|b| &b.inv * CVec::from_iterator(b.idx.len(), b.idx.iter().map(|&i| h0[i])))
        .collect();
    times
        .iter()
        .map(|&t| {
            let mut h = CVec::zeros(h0.len());
            for (b, w) in blocks.iter().zip(&coeffs) {
                let decayed = CVec::from_iterator(w.len(), w.iter().zip(&b.vals).map(|(c, l)| c * (-l * t).exp()));
                let hb = &b.vecs * decayed;
                for (k, &i) in b.idx.iter().enumerate() {
                    h[i] = hb[k];
                }
            }
            h
        })
        .collect()
}

struct CrankNicolson<'a> {
    l: &'a CMat,
    cache: HashMap<u64, (LU<C64, Dyn, Dyn>, CMat)>,
}

impl CrankNicolson<'_> {
    fn step(&mut self, h: &CVec, dt: f64) -> CVec {
        let l = self.l;
        let (lu, rhs) = self.cache.entry(dt.to_bits()).or_insert_with(|| {
            let n = l.nrows();
            let half = C64::new(dt / 2.0, 0.0);
            let id = CMat::identity(n, n);
            ((&id + l * half).lu(), &id - l * half)
        });
        lu.solve(&(&*rhs * h)).expect("I + dt/2·L is invertible for accretive L")
    }
}

/// Marches between consecutive times with steps of at most `max_dt`; `exact` demands that
/// every interval be an integer multiple of `max_dt`.
fn cn_states(l: &CMat, h0: &CVec, times: &[f64], max_dt: f64, exact: bool) -> Result<Vec<CVec>> {
    let mut cn = CrankNicolson { l, cache: HashMap::new() };
    let mut h = h0.clone();
    let mut out = Vec::with_capacity(times.len());
    let mut prev = 0.0;
    for &t in times {
        let span = t - prev;
        if span > 0.0 {
            let ratio = span / max_dt;
            let n = (ratio - 1e-9).ceil().max(1.0);
            if exact && (ratio - ratio.round()).abs() > 1e-9 * ratio.max(1.0) {
                return Err(EvolveError::Invalid(format!("time {t} is not on the dt = {max_dt} grid")));
            }
            let dt = if exact { max_dt } else { span / n };
            for _ in 0..n as usize {
                h = cn.step(&h, dt);
            }
        }
        out.push(h.clone());
        prev = t;
    }
    Ok(out)
}

fn track(states: &[CVec], times: Vec<f64>, f: &Functionals) -> Result<Trajectory> {
    let mut tr = Trajectory::new(times)?;
    let n = states.len();
    let (mut l2, mut ah, mut ch, mut mixed, mut h1, mut tw) =
        (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for (i, h) in states.iter().enumerate() {
        l2[i] = h.norm_squared();
        if !f.chain.is_empty() {
            let rec = norms(h, &f.chain, f.twist.as_ref())?;
            h1[i] = rec.h1 * rec.h1;
            tw[i] = rec.twisted.unwrap_or(0.0);
            let a = f.chain[0].apply(h);
            ah[i] = a.norm_squared();
            if let Some(c) = f.chain.get(1) {
                let c = c.apply(h);
                ch[i] = c.norm_squared();
                mixed[i] = a.dotc(&c).re;
            }
        }
    }
    tr.insert("l2", l2)?;
    if !f.chain.is_empty() {
        tr.insert("ah", ah)?;
        if f.chain.len() > 1 {
            tr.insert("ch", ch)?;
            tr.insert("mixed", mixed)?;
        }
        tr.insert("h1", h1)?;
        if f.twist.is_some() {
            tr.insert("twisted", tw)?;
        }
    }
    for (name, op) in &f.extras {
        tr.insert(name, states.iter().map(|h| op.apply(h).norm_squared()).collect())?;
    }
    Ok(tr)
}

/// Computes `e^{-tL}h₀` on `times` (increasing, starting at 0) after removing the kernel
/// component of `h₀`.
pub fn propagate(
    l: &LinOp,
    h0: &CVec,
    kernel: &[CVec],
    times: &[f64],
    scheme: Scheme,
    functionals: &Functionals,
) -> Result<Propagation> {
    if times.first() != Some(&0.0) {
        return Err(EvolveError::Invalid("times must start at 0".into()));
    }
    if h0.len() != l.dim() {
        return Err(EvolveError::Invalid("initial state does not fit the operator".into()));
    }
    let mut h = h0.clone();
    let mut removed = CVec::zeros(h.len());
    for k in orthonormal(kernel) {
        let c = k.dotc(&h);
        removed += &k * c;
        h -= &k * c;
    }
    let (states, used) = match scheme {
        Scheme::CrankNicolson { dt } => {
            if !(dt > 0.0) {
                return Err(EvolveError::Invalid(format!("dt must be positive, got {dt}")));
            }
            (cn_states(&l.entries, &h, times, dt, true)?, SchemeUsed::CrankNicolson { dt })
        }
        Scheme::Eig => {
            if l.dim() > spectral_core::gap::DENSE_LIMIT {
                return Err(EvolveError::Invalid(format!("dimension {} too large for the eigen scheme", l.dim())));
            }
            match eig_blocks(&l.entries) {
                Some((b, residual)) if residual <= EIG_RESIDUAL_TOL => {
                    (eig_states(&b, &h, times), SchemeUsed::Eig { residual })
                }
                other => {
                    let residual = other.map_or(f64::INFINITY, |(_, r)| r);
                    (
                        cn_states(&l.entries, &h, times, FALLBACK_DT, false)?,
                        SchemeUsed::Fallback { residual, dt: FALLBACK_DT },
                    )
                }
            }
        }
    };
    let trajectory = track(&states, times.to_vec(), functionals)?;
    Ok(Propagation { trajectory, states, kernel_component: removed.norm(), scheme: used })
}

#[cfg(test)]
mod tests {
    use super::*;
    use spectral_core::{build_basis, BasisSpec, TensorBasis};
    use std::sync::Arc;

    fn diagonal(vals: &[f64]) -> LinOp {
        let basis = Arc::new(TensorBasis::new(vec![build_basis(BasisSpec::hermite(vals.len(), 1.0)).unwrap()]).unwrap());
        let d = CVec::from_iterator(vals.len(), vals.iter().map(|&v| C64::new(v, 0.0)));
        LinOp::new(basis, CMat::from_diagonal(&d))
    }

    #[test]
    fn kernel_data_stays_at_zero() {
        let l = diagonal(&[0.0, 1.0, 2.0]);
        let mut h = CVec::zeros(3);
        h[0] = C64::new(2.0, 0.0);
        let k = vec![h.clone() / C64::new(2.0, 0.0)];
        let p = propagate(&l, &h, &k, &[0.0, 1.0], Scheme::Eig, &Functionals::default()).unwrap();
        assert!((p.kernel_component - 2.0).abs() < 1e-15);
        assert!(p.trajectory.get("l2").unwrap().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn symmetric_gap_gives_exact_decay() {
        let l = diagonal(&[0.0, 0.7, 3.0]);
        let h = CVec::from_vec(vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        let times = [0.0, 0.5, 2.0];
        let p = propagate(&l, &h, &[], &times, Scheme::Eig, &Functionals::default()).unwrap();
        let l2 = p.trajectory.get("l2").unwrap();
        for (i, t) in times.iter().enumerate() {
            assert!((l2[i] - (1.0 + (-1.4 * t).exp())).abs() < 1e-13);
        }
    }

    #[test]
    fn crank_nicolson_matches_eig() {
        let l = diagonal(&[0.3, 1.0]);
        let h = CVec::from_vec(vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)]);
        let times = [0.0, 0.5, 1.0];
        let cn = propagate(&l, &h, &[], &times, Scheme::CrankNicolson { dt: 1e-3 }, &Functionals::default()).unwrap();
        let ex = propagate(&l, &h, &[], &times, Scheme::Eig, &Functionals::default()).unwrap();
        for (a, b) in cn.states.iter().zip(&ex.states) {
            assert!((a - b).norm() < 1e-6);
        }
        assert!(propagate(&l, &h, &[], &[0.0, 0.25], Scheme::CrankNicolson { dt: 0.2 }, &Functionals::default()).is_err());
        assert!(propagate(&l, &h, &[], &[0.0, 0.2], Scheme::CrankNicolson { dt: 0.0 }, &Functionals::default()).is_err());
    }

    #[test]
    fn defective_generator_falls_back() {
        let basis = Arc::new(TensorBasis::new(vec![build_basis(BasisSpec::hermite(2, 1.0)).unwrap()]).unwrap());
        let m = CMat::from_row_slice(2, 2, &[C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0)]);
        let l = LinOp::new(basis, m);
        let h = CVec::from_vec(vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)]);
        let p = propagate(&l, &h, &[], &[0.0, 1.0], Scheme::Eig, &Functionals::default()).unwrap();
        assert!(matches!(p.scheme, SchemeUsed::Fallback { .. }));
        // e^{-t}(−t, 1) at t = 1.
        let e = (-1.0f64).exp();
        assert!((p.states[1][0].re + e).abs() < 1e-6 && (p.states[1][1].re - e).abs() < 1e-6);
    }
}
