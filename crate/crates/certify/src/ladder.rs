use spectral_core::TwistCoeffs;

use crate::{CertifyError, Result};

const LOG_TOL: f64 = 1e-12;

/// Output of [`ladder_geometric`]: `u_k = ε^{m_k}`.
#[derive(Clone, Debug)]
pub struct GeometricLadder {
    pub delta: f64,
    pub u: Vec<f64>,
    /// `ln u_k`; the linear values underflow for long ladders.
    pub log_u: Vec<f64>,
    pub exponents: Vec<f64>,
    /// `ε = 10^{-j}`.
    pub eps_exponent: u32,
}

fn within(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + LOG_TOL * rhs.abs().max(1.0)
}

/// `u_{k+1} ≤ δu_k` and `u_k² ≤ δu_{k−1}u_{k+1}`, checked on logarithms.
pub fn validate_geometric(log_u: &[f64], delta: f64) -> bool {
    let ld = delta.ln();
    let steps = log_u.windows(2).all(|w| within(w[1], ld + w[0]));
    let convex = log_u.windows(3).all(|w| within(2.0 * w[1], ld + w[0] + w[2]));
    steps && convex
}

/// Positive numbers `1 = u_0, u_1, …, u_N` with `u_{k+1} ≤ δu_k` and `u_k² ≤ δu_{k−1}u_{k+1}`.
///
/// Exponents follow the midpoint rule `m_{k+1} = m_k + (m_k − m_{k−1})/2`, and `ε` is the
/// largest power `10^{-j}` for which both families hold.
pub fn ladder_geometric(delta: f64, n: usize) -> Result<GeometricLadder> {
    if !(delta > 0.0 && delta < 1.0) || n < 1 {
        return Err(CertifyError::Invalid(format!("need δ ∈ (0,1) and N ≥ 1, got δ = {delta}, N = {n}")));
    }
    let mut m = vec![0.0, 1.0];
    while m.len() < n + 1 {
        let k = m.len() - 1;
        m.push(m[k] + 0.5 * (m[k] - m[k - 1]));
    }
    m.truncate(n + 1);
    // Every increment and convexity gap is at least 2^{-(N-1)}, so this j always works.
    let jmax = ((-delta.log10()) * 2f64.powi(n as i32 - 1)).ceil() as u32 + 1;
    for j in 1..=jmax.max(1) {
        let le = -(j as f64) * std::f64::consts::LN_10;
        let log_u: Vec<f64> = m.iter().map(|mk| mk * le).collect();
        if validate_geometric(&log_u, delta) {
            return Ok(GeometricLadder {
                delta,
                u: log_u.iter().map(|l| l.exp()).collect(),
                log_u,
                exponents: m,
                eps_exponent: j,
            });
        }
    }
    Err(CertifyError::Invalid("no admissible ε found".into()))
}

/// Twisted-norm coefficients for a chain with `levels` operators `C_0…C_{levels−1}`:
/// `(a_0, b_0, a_1, b_1, …) = (u_1, u_2, u_3, …)` from [`ladder_geometric`].
pub fn part_one_ladder(delta: f64, levels: usize) -> Result<TwistCoeffs> {
    if levels < 1 {
        return Err(CertifyError::Invalid("at least one chain level".into()));
    }
    let g = ladder_geometric(delta, 2 * levels - 1)?;
    let mut a = Vec::with_capacity(levels);
    let mut b = Vec::with_capacity(levels - 1);
    for (i, u) in g.u[1..].iter().enumerate() {
        if i % 2 == 0 {
            a.push(*u);
        } else {
            b.push(*u);
        }
    }
    Ok(TwistCoeffs { a, b })
}

/// `a_0 ≤ δ, b_k ≤ δa_k, a_{k+1} ≤ δb_k, a_k² ≤ δb_{k−1}b_k, b_k² ≤ δa_k a_{k+1}`.
pub fn validate_part_one(t: &TwistCoeffs, delta: f64) -> bool {
    if t.a.len() != t.b.len() + 1 || t.a.iter().chain(&t.b).any(|x| !(*x > 0.0)) {
        return false;
    }
    let mut log_u = vec![0.0];
    for k in 0..t.a.len() {
        log_u.push(t.a[k].ln());
        if k < t.b.len() {
            log_u.push(t.b[k].ln());
        }
    }
    validate_geometric(&log_u, delta)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SchedulePath {
    ClosedForm,
    ExtendedChain,
    Search,
}

/// Part-III coefficient schedule `1 = a_0 ≥ a_1 ≥ … ≥ a_{J−1}` with its validity report.
#[derive(Clone, Debug)]
pub struct NonlinearLadder {
    /// `a_1 … a_{J−1}` as returned.
    pub a: Vec<f64>,
    /// The closed-form recursion, always reported.
    pub closed_form: Vec<f64>,
    pub path: SchedulePath,
    /// `K` after the reduction `K ≤ min(1, Ē^{-k}, Ē^{-1})`.
    pub k_used: f64,
    pub eps: f64,
    pub e: f64,
    /// Constants of the lower bound `a_{J−1} ≥ K_1 E^{ℓε}`.
    pub k1: f64,
    pub ell: f64,
    /// Worst log-margin of each condition line on the returned values (≥ 0 means satisfied).
    pub margins: [f64; 4],
    pub feasible: bool,
}

/// `α_1 = 2^{J−2} − 1`; `ε_1 = 1/(2α_1)` (infinite for `J = 2`).
pub fn eps1(j: usize) -> f64 {
    let a1 = (1u64 << (j - 2)) as f64 - 1.0;
    if a1 == 0.0 {
        f64::INFINITY
    } else {
        0.5 / a1
    }
}

/// Range of `ε` on which the extended chain provably meets every line: `1/(2α_0)`,
/// `α_0 = 2^{J−1} − 1`.
pub fn eps_extended(j: usize) -> f64 {
    0.5 / ((1u64 << (j - 1)) as f64 - 1.0)
}

/// `α_j` for `j = 0…J−2`, from `α_{J−2} = 1`, `α_{j−1} = 2α_j + 1`.
pub fn alphas(j: usize) -> Vec<f64> {
    let mut al = vec![0.0; j - 1];
    al[j - 2] = 1.0;
    for i in (1..j - 1).rev() {
        al[i - 1] = 2.0 * al[i] + 1.0;
    }
    al
}

struct Problem {
    log_k: f64,
    log_e: f64,
    k: f64,
    eps: f64,
    log_k1: f64,
    ell: f64,
}

impl Problem {
    /// Log-margins of the four lines for `y_j = ln a_j`, `j = 1…J−1`.
    fn margins(&self, y: &[f64]) -> [f64; 4] {
        let last = *y.last().unwrap();
        let mut mono = f64::INFINITY;
        let mut prev = 0.0;
        for &yj in y {
            mono = mono.min(prev - yj);
            prev = yj;
        }
        let top = self.log_k + self.eps * self.log_e - y[0];
        let rhs3 = self.log_k + (1.0 + self.eps) * last + self.k * self.eps * self.log_e;
        let mut third = f64::INFINITY;
        prev = 0.0;
        for &yj in y {
            third = third.min(rhs3 - (2.0 * yj - prev));
            prev = yj;
        }
        let floor = last - (self.log_k1 + self.ell * self.eps * self.log_e);
        [mono, top, third, floor]
    }

    fn violation(&self, y: &[f64]) -> f64 {
        // A small target margin keeps the search away from the boundary.
        self.margins(y).iter().map(|m| (1e-9 - m).max(0.0)).sum()
    }
}

fn ok(m: &[f64; 4]) -> bool {
    m.iter().all(|x| *x >= -LOG_TOL)
}

/// Compass search on the summed log-violation, starting from `y`.
fn pattern_search(p: &Problem, mut y: Vec<f64>) -> Vec<f64> {
    let mut step = 1.0;
    let mut f = p.violation(&y);
    while step > 1e-13 && f > 0.0 {
        let mut improved = false;
        for i in 0..y.len() {
            for dir in [-1.0, 1.0] {
                let mut t = y.clone();
                t[i] += dir * step;
                let ft = p.violation(&t);
                if ft < f {
                    y = t;
                    f = ft;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    y
}

/// Coefficient schedule for the nonlinear Lyapunov functional.
///
/// Tries the closed-form recursion first, then the chain extended down to `a_0 = 1` (which
/// meets every line for `ε ≤ 1/(2α_0)`), then a log-space pattern search.
pub fn ladder_nonlinear(k_in: f64, e_bar: f64, e: f64, k: f64, j: usize, eps: f64) -> Result<NonlinearLadder> {
    if !(k_in > 0.0 && e_bar > 0.0 && k > 0.0 && e > 0.0) || j < 2 {
        return Err(CertifyError::Invalid("need K, Ē, E, k > 0 and J ≥ 2".into()));
    }
    if !(eps > 0.0 && eps <= eps1(j) && eps <= 1.0) {
        return Err(CertifyError::Invalid(format!("ε = {eps} outside (0, min(1, ε₁ = {}))", eps1(j))));
    }
    if e > e_bar {
        return Err(CertifyError::Invalid(format!("E = {e} exceeds Ē = {e_bar}")));
    }
    let kk = k_in.min(1.0).min(e_bar.powf(-k)).min(e_bar.recip());
    let al = alphas(j);
    let alpha1 = if j == 2 { 0.0 } else { al[1] };
    let alpha0 = 2.0 * alpha1 + 1.0;
    let kmax = k.max(1.0);
    let k1 = kk.powf(2.0 * alpha0) * if e_bar > 1.0 { e_bar.powf(-2.0 * alpha0 * (k - 1.0).abs()) } else { 1.0 };
    let ell = 2.0 * alpha0 * kmax;
    let p = Problem {
        log_k: kk.ln(),
        log_e: e.ln(),
        k,
        eps,
        log_k1: k1.ln(),
        ell,
    };

    let q = kk * e.powf(k * eps);
    let chain = |last: f64, base: f64| -> Vec<f64> {
        let mut a: Vec<f64> = (1..j - 1).map(|i| last * (base * last.powf(eps)).powf(-al[i])).collect();
        a.push(last);
        a
    };
    let closed_last = (kk.powf(1.0 + alpha1) * e.powf((1.0 + k * alpha1) * eps)).powf(1.0 / (1.0 - alpha1 * eps));
    let closed_form = chain(closed_last, q);
    let logs = |a: &[f64]| a.iter().map(|x| x.ln()).collect::<Vec<_>>();

    let mut path = SchedulePath::ClosedForm;
    let mut y = logs(&closed_form);
    let mut m = p.margins(&y);
    if !ok(&m) && alpha0 * eps < 1.0 {
        let r = q.min(kk * e.powf(eps));
        let ext = chain(r.powf(alpha0 / (1.0 - alpha0 * eps)), r);
        let ye = logs(&ext);
        let me = p.margins(&ye);
        if ok(&me) {
            path = SchedulePath::ExtendedChain;
            y = ye;
            m = me;
        }
    }
    if !ok(&m) {
        path = SchedulePath::Search;
        y = pattern_search(&p, y);
        m = p.margins(&y);
    }
    Ok(NonlinearLadder {
        a: y.iter().map(|v| v.exp()).collect(),
        closed_form,
        path,
        k_used: kk,
        eps,
        e,
        k1,
        ell,
        margins: m,
        feasible: ok(&m),
    })
}
