//! Acceptance suite: one config per criterion, each checked against oracles computed here.
//! Prints one line per criterion and exits nonzero when any fails.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use hypolab::{execute, prepare, Config, RunRecord};
use nalgebra::DMatrix;

struct Run {
    record: RunRecord,
    cfg: HashMap<String, serde_json::Value>,
    dir: PathBuf,
    name: String,
    secs: f64,
}

impl Run {
    fn head(&self, key: &str) -> Result<f64, String> {
        self.record.headline.get(key).copied().flatten().ok_or_else(|| format!("headline `{key}` missing"))
    }

    fn cfg(&self, key: &str) -> Result<f64, String> {
        self.cfg.get(key).and_then(|v| v.as_f64()).ok_or_else(|| format!("config `{key}` missing"))
    }

    fn csv(&self, table: &str) -> Result<Csv, String> {
        let path = self.dir.join(format!("{}_{table}.csv", self.name));
        let text = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
        let mut lines = text.lines().filter(|l| !l.starts_with('#'));
        let header: Vec<String> = lines.next().ok_or("empty csv")?.split(',').map(String::from).collect();
        let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
        Ok(Csv { header, rows })
    }
}

struct Csv {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Csv {
    fn idx(&self, name: &str) -> Result<usize, String> {
        self.header.iter().position(|h| h == name).ok_or_else(|| format!("column `{name}` missing"))
    }

    fn col(&self, name: &str) -> Result<Vec<f64>, String> {
        let i = self.idx(name)?;
        self.rows.iter().map(|r| r[i].parse::<f64>().map_err(|e| format!("{name}: {e}"))).collect()
    }

    fn text(&self, name: &str) -> Result<Vec<String>, String> {
        let i = self.idx(name)?;
        Ok(self.rows.iter().map(|r| r[i].clone()).collect())
    }
}

fn run(config: &str, out: &Path) -> Result<Run, String> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(format!("{config}.json"));
    let cfg = Config::load(&path).map_err(|e| e.to_string())?;
    let values = cfg.values().iter().map(|(k, v)| (k.clone(), v.clone())).collect();
    let mut p = prepare(&cfg, config).map_err(|e| e.to_string())?;
    p.out_dir = out.to_path_buf();
    let start = Instant::now();
    let (record, _) = execute(&p).map_err(|e| e.to_string())?;
    Ok(Run { record, cfg: values, dir: p.out_dir, name: p.name, secs: start.elapsed().as_secs_f64() })
}

/// Least squares `y = slope·x + intercept`, with `R²`.
fn linfit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, intercept, r2)
}

/// Decay rate and `R²` of `y ≈ Ce^{−rt}` on `[lo, hi]`.
fn exp_fit(t: &[f64], y: &[f64], lo: f64, hi: f64) -> (f64, f64) {
    let (x, ly): (Vec<f64>, Vec<f64>) =
        t.iter().zip(y).filter(|(t, _)| **t >= lo - 1e-12 && **t <= hi + 1e-12).map(|(t, y)| (*t, y.ln())).unzip();
    let (s, _, r2) = linfit(&x, &ly);
    (-s, r2)
}

/// Exponent `p` of `y ≈ Ct^p` on `[lo, hi]`.
fn power_fit(t: &[f64], y: &[f64], lo: f64, hi: f64) -> f64 {
    let (x, ly): (Vec<f64>, Vec<f64>) = t
        .iter()
        .zip(y)
        .filter(|(t, _)| **t >= lo * (1.0 - 1e-12) && **t <= hi * (1.0 + 1e-12))
        .map(|(t, y)| (t.ln(), y.ln()))
        .unzip();
    linfit(&x, &ly).0
}

fn max_increase(y: &[f64]) -> f64 {
    y.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max)
}

#[derive(Default)]
struct Check {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Check {
    fn expect(&mut self, ok: bool, what: String) {
        if ok {
            self.notes.push(what);
        } else {
            self.failures.push(what);
        }
    }

    fn runtime(&mut self, r: &Run, limit: f64) {
        self.expect(r.secs < limit, format!("runtime {:.1}s < {limit}s", r.secs));
    }
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * b.abs().max(1e-300)
}

fn c01(out: &Path, c: &mut Check) -> Result<(), String> {
    let r = run("c01_explicit_rate", out)?;
    // At M = κ = 1, a = b = c = 0.05: min(0.65/1.1, (0.05 − 0.15²)/1.1) = 0.0275/1.1.
    let oracle = 0.0275 / 1.1;
    let v = r.head("point_objective")?;
    c.expect((v - oracle).abs() <= 1e-12, format!("objective at 0.05³ = {v} vs {oracle}"));
    let direct = certify::explicit_objective(1.0, 1.0, 0.05, 0.05, 0.05);
    c.expect((direct - 0.025).abs() <= 1e-12, format!("library objective {direct}"));
    let rate = r.head("rate")?;
    c.expect((0.025..=0.5).contains(&rate), format!("optimized rate {rate} in [0.025, 0.5]"));
    let (a, b, cc) = (r.head("a")?, r.head("b")?, r.head("c")?);
    c.expect(b * b <= a * cc * (1.0 + 1e-12), "optimizer respects b² ≤ ac".into());
    c.runtime(&r, 5.0);
    Ok(())
}

fn c02(out: &Path, c: &mut Check) -> Result<(), String> {
    let r = run("c02_rate_sandwich", out)?;
    let tr = r.csv("trajectory")?;
    let t = tr.col("t")?;
    let t_end = r.cfg("time.t_end")?;
    let certified = r.head("certified_rate")?;
    // Columns hold squared norms, so norm rates are half the fitted slopes.
    let (tw, _) = exp_fit(&t, &tr.col("twisted")?, 0.0, t_end);
    let tw = tw / 2.0;
    c.expect(tw >= certified - 0.005, format!("twisted rate {tw:.4} ≥ certified {certified:.5} − 0.005"));
    let (h1, _) = exp_fit(&t, &tr.col("h1")?, r.cfg("fit.h1_lo")?, r.cfg("fit.h1_hi")?);
    let h1 = h1 / 2.0;
    c.expect((h1 - 0.5).abs() <= 0.05, format!("H¹ rate {h1:.4} = 0.50 ± 0.05"));
    c.runtime(&r, 60.0);
    Ok(())
}

fn c03(out: &Path, c: &mut Check) -> Result<(), String> {
    let r = run("c03_short_time", out)?;
    let st = r.csv("short_time")?;
    let t = st.col("t")?;
    let gv = power_fit(&t, &st.col("ah")?, 1e-3, 1e-1) / 2.0;
    let gx = power_fit(&t, &st.col("ch")?, 1e-3, 1e-1) / 2.0;
    c.expect((gv + 0.5).abs() <= 0.1, format!("‖∇_v h‖ exponent {gv:.4} = −0.5 ± 0.1"));
    c.expect((gx + 1.5).abs() <= 0.15, format!("‖∇_x h‖ exponent {gx:.4} = −1.5 ± 0.15"));
    let f = r.csv("herau")?.col("F")?;
    let violations = f.windows(2).filter(|w| w[1] - w[0] > 1e-10).count();
    c.expect(violations == 0, format!("Hérau functional: {violations} increases above 1e-10 over {} samples", f.len()));
    c.runtime(&r, 120.0);
    Ok(())
}

/// Positive definiteness of the symmetric part, by Cholesky after unit-diagonal scaling.
fn definite(m: &DMatrix<f64>) -> bool {
    let s = (m + m.transpose()) * 0.5;
    if (0..s.nrows()).any(|i| s[(i, i)] <= 0.0) {
        return false;
    }
    let d: Vec<f64> = (0..s.nrows()).map(|i| s[(i, i)].sqrt().recip()).collect();
    let scaled = DMatrix::from_fn(s.nrows(), s.ncols(), |i, j| s[(i, j)] * d[i] * d[j]);
    scaled.cholesky().is_some()
}

fn c04(out: &Path, c: &mut Check) -> Result<(), String> {
    let r = run("c04_certificate_matrices", out)?;
    let tab = r.csv("matrices")?;
    let kind = tab.text("kind")?;
    let cols = ["alpha", "beta", "m", "delta", "a", "b", "c"].map(|n| tab.col(n));
    let [al, be, m, de, a, b, cc] = cols.map(|v| v.unwrap_or_default());
    let le = |x: f64, y: f64| x <= y * (1.0 + 1e-9);
    let (mut n_aab, mut n_sb, mut bad_constraints, mut not_definite) = (0, 0, 0, 0);
    for i in 0..kind.len() {
        let (a, b, cc, m) = (a[i], b[i], cc[i], m[i]);
        if kind[i] == "aab" {
            n_aab += 1;
            let d = de[i];
            let mm = al[i].max(be[i]).max(1.0);
            let u = [1.0, a, b, cc];
            let ok = le(d, 1.0 / (32.0 * mm * mm))
                && (0..3).all(|k| le(u[k + 1], d * u[k]))
                && (1..3).all(|k| le(u[k] * u[k], d * u[k - 1] * u[k + 1]));
            bad_constraints += usize::from(!ok);
            not_definite += usize::from(!definite(&certify::aab_matrix(al[i], be[i], a, b, cc)));
        } else {
            n_sb += 1;
            let q = 1.0 / (64.0 * m * m);
            let ok = le(a, q) && le(b, q * a) && le(cc, q * b) && le(a, q * b.sqrt()) && le(b, q * (a * cc).sqrt());
            bad_constraints += usize::from(!ok);
            not_definite += usize::from(!definite(&certify::sb_matrix(m, a, b, cc)));
        }
    }
    c.expect(n_aab == 1000 && n_sb == 1000, format!("{n_aab} 4×4 and {n_sb} 5×5 samples"));
    c.expect(bad_constraints == 0, format!("{bad_constraints} samples outside the ladder constraints"));
    c.expect(not_definite == 0, format!("{not_definite} symmetric parts fail Cholesky"));
    c.runtime(&r, 10.0);
    Ok(())
}

fn c05(out: &Path, c: &mut Check) -> Result<(), String> {
    let r = run("c05_tensorization", out)?;
    let tab = r.csv("toys")?;
    let (gap, k1, k2, l, cl) = (tab.col("gap")?, tab.col("kappa1")?, tab.col("kappa2")?, tab.col("lambda")?, tab.col("cap_lambda")?);
    let mut violations = 0;
    let mut worst = f64::INFINITY;
    for i in 0..gap.len() {
        let bound = (k2[i] / 2.0).min(k2[i] * l[i] / (16.0 * cl[i] * cl[i])).min(k1[i] * l[i] / 2.0);
        violations += usize::from(!(gap[i] >= bound));
        worst = worst.min(gap[i] / bound);
    }
    c.expect(gap.len() == 200, format!("{} toys", gap.len()));
    c.expect(violations == 0, format!("{violations} gaps below the bound, worst gap/bound {worst:.3}"));
    c.runtime(&r, 60.0);
    Ok(())
}

fn c06(out: &Path, c: &mut Check) -> Result<(), String> {
    let r = run("c06_ladders", out)?;
    let geo = r.csv("geometric")?;
    let (sample, delta, lu) = (geo.col("sample")?, geo.col("delta")?, geo.col("log_u")?);
    let mut ladders: Vec<(f64, Vec<f64>)> = Vec::new();
    for i in 0..sample.len() {
        if i == 0 || sample[i] != sample[i - 1] {
            ladders.push((delta[i], Vec::new()));
        }
        ladders.last_mut().unwrap().1.push(lu[i]);
    }
    let tol = 1e-9;
    let geo_bad = ladders
        .iter()
        .filter(|(d, y)| {
            let ld = d.ln();
            !(y[0] == 0.0
                && y.windows(2).all(|w| w[1] <= ld + w[0] + tol)
                && y.windows(3).all(|w| 2.0 * w[1] <= ld + w[0] + w[2] + tol))
        })
        .count();
    c.expect(geo_bad == 0, format!("{geo_bad} of {} geometric ladders break an inequality", ladders.len()));

    let nl = r.csv("nonlinear")?;
    let (kin, ebar, e, k, j, eps) = (nl.col("k_in")?, nl.col("e_bar")?, nl.col("e")?, nl.col("k")?, nl.col("j")?, nl.col("eps")?);
    let a = nl.text("a")?;
    let mut bad = 0;
    for i in 0..kin.len() {
        let jj = j[i] as i32;
        let kk = kin[i].min(1.0).min(ebar[i].powf(-k[i])).min(1.0 / ebar[i]);
        let alpha1 = 2f64.powi(jj - 2) - 1.0;
        let alpha0 = 2.0 * alpha1 + 1.0;
        let k1 = kk.powf(2.0 * alpha0) * if ebar[i] > 1.0 { ebar[i].powf(-2.0 * alpha0 * (k[i] - 1.0).abs()) } else { 1.0 };
        let ell = 2.0 * alpha0 * k[i].max(1.0);
        let y: Vec<f64> = a[i].split(';').map(|s| s.parse::<f64>().map(f64::ln)).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
        let last = *y.last().unwrap();
        let (le, ep) = (e[i].ln(), eps[i]);
        let mut prev = 0.0;
        let mut ok = y.len() == jj as usize - 1;
        for &yj in &y {
            ok &= yj <= prev + tol;
            ok &= 2.0 * yj - prev <= kk.ln() + (1.0 + ep) * last + k[i] * ep * le + tol;
            prev = yj;
        }
        ok &= y[0] <= kk.ln() + ep * le + tol;
        ok &= last >= k1.ln() + ell * ep * le - tol;
        bad += usize::from(!ok);
    }
    c.expect(kin.len() == 100, format!("{} grid points", kin.len()));
    c.expect(bad == 0, format!("{bad} schedules break one of the four lines"));

    let (wk, wbar, we, wkk, weps) =
        (r.cfg("ladder.worked.k_in")?, r.cfg("ladder.worked.e_bar")?, r.cfg("ladder.worked.e")?, r.cfg("ladder.worked.k")?, r.cfg("ladder.worked.eps")?);
    let kk = wk.min(1.0).min(wbar.powf(-wkk)).min(1.0 / wbar);
    let target = kk * we.powf(weps);
    let a1 = r.head("worked_a1")?;
    c.expect((a1 - target).abs() <= 1e-12, format!("worked J=3 a₁ = {a1} vs K E^ε = {target}"));
    c.runtime(&r, 5.0);
    Ok(())
}

fn c07(out: &Path, c: &mut Check) -> Result<(), String> {
    let r = run("c07_differential_inequality", out)?;
    let kappa = |d: f64, th: f64| d.min(th / (1.0 - th));
    let ks = kappa(r.cfg("synthetic.delta")?, r.cfg("synthetic.theta")?);
    let syn_ok = r.record.verdicts.get("synthetic_hypotheses").copied().unwrap_or(false);
    c.expect(syn_ok, "synthetic instance hypotheses hold".into());
    let (se, sc) = (r.head("synthetic_exponent")?, r.head("synthetic_c_bar")?);
    c.expect((se + 1.0 / ks).abs() <= 1e-12 && sc.is_finite(), format!("synthetic exponent {se} = −1/κ = {}, C̄ = {sc:.4}", -1.0 / ks));
    let km = kappa(r.cfg("map.delta")?, r.cfg("map.theta")?);
    let (me, mc) = (r.head("mapped_exponent")?, r.head("mapped_c_bar")?);
    c.expect((me + 3.0).abs() <= 1e-9 && (me + 1.0 / km).abs() <= 1e-9, format!("mapped exponent {me} = −3"));
    let env = r.csv("envelope")?;
    let (t, e) = (env.col("t")?, env.col("E")?);
    let viol = t.iter().zip(&e).filter(|(t, e)| **t <= 1.0 && **e > mc * t.powi(-3) * (1.0 + 1e-12)).count();
    c.expect(viol == 0 && t.len() > 1, format!("E ≤ {mc:.3}·t⁻³: {viol} violations over {} times", t.len()));
    c.runtime(&r, 60.0);
    Ok(())
}

fn c08(out: &Path, c: &mut Check) -> Result<(), String> {
    let r = run("c08_nash", out)?;
    let tab = r.csv("nash")?;
    let ratio: Vec<f64> = tab.col("lhs")?.iter().zip(tab.col("rhs_core")?).map(|(l, rc)| l / rc).collect();
    let max = ratio.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = ratio.iter().cloned().fold(f64::INFINITY, f64::min);
    let theta = r.head("theta")?;
    c.expect((theta - 0.4).abs() <= 1e-12, format!("θ = {theta}"));
    c.expect(ratio.len() == 7, format!("{} family members", ratio.len()));
    c.expect(min > 0.0 && max / min <= 10.0, format!("spread {:.4} ≤ 10", max / min));
    c.runtime(&r, 10.0);
    Ok(())
}

fn c09(out: &Path, c: &mut Check) -> Result<(), String> {
    let r = run("c09_entropic_decay", out)?;
    let (lo, hi) = (r.cfg("fit.lo")?, r.cfg("fit.hi")?);
    let tr = r.csv("trajectory")?;
    let h = tr.col("entropy")?;
    c.expect(max_increase(&h) <= 1e-10, format!("entropy max increase {:.3e}", max_increase(&h)));
    let (rate, r2) = exp_fit(&tr.col("t")?, &tr.col("energy")?, lo, hi);
    c.expect(rate > 0.0 && r2 >= 0.98, format!("energy rate {rate:.4}, R² {r2:.5}"));
    let rf = r.csv("refined")?;
    let (rrate, _) = exp_fit(&rf.col("t")?, &rf.col("energy")?, lo, hi);
    c.expect(close(rate, rrate, 0.1), format!("refined rate {rrate:.4} within 10%"));
    c.runtime(&r, 600.0);
    Ok(())
}

fn c10(out: &Path, c: &mut Check) -> Result<(), String> {
    let r = run("c10_oseen", out)?;
    let tab = r.csv("spectrum")?;
    let (al, re) = (tab.col("alpha")?, tab.col("min_re")?);
    let lx: Vec<f64> = al.iter().map(|a| a.ln()).collect();
    let ly: Vec<f64> = re.iter().map(|v| v.ln()).collect();
    let p = linfit(&lx, &ly).0;
    c.expect(al.len() == 5, format!("{} couplings", al.len()));
    c.expect((0.4..=0.6).contains(&p), format!("fitted exponent {p:.4} in [0.4, 0.6]"));
    let base = re[0] / al[0].powf(0.25);
    let below = al.iter().zip(&re).filter(|(a, v)| **v / a.powf(0.25) < base * (1.0 - 1e-12)).count();
    c.expect(below == 0, format!("{below} values under the α^(1/4) floor"));
    c.runtime(&r, 600.0);
    Ok(())
}

fn c11(out: &Path, c: &mut Check) -> Result<(), String> {
    let r = run("c11_vfp", out)?;
    let s = r.head("smallness")?;
    c.expect(s < 0.5, format!("smallness {s:.4} < 0.5"));
    let tr = r.csv("trajectory")?;
    let fe = tr.col("free_energy")?;
    c.expect(max_increase(&fe) <= 1e-10, format!("free energy max increase {:.3e}", max_increase(&fe)));
    let (rate, r2) = exp_fit(&tr.col("t")?, &tr.col("l1_distance")?, r.cfg("fit.lo")?, r.cfg("fit.hi")?);
    c.expect(rate > 0.0 && r2 >= 0.98, format!("L¹ rate {rate:.4}, R² {r2:.5}"));
    let rb = r.csv("rebrackets")?;
    let (e, lb, la) = (rb.col("e_rel")?, rb.col("l_before")?, rb.col("l_after")?);
    let inside = |l: f64, e: f64| e / 4.0 <= l && l <= 1.25 * e;
    let bad = (0..e.len()).filter(|&i| !(inside(lb[i], e[i]) && inside(la[i], e[i]))).count();
    c.expect(!e.is_empty() && bad == 0, format!("sandwich E/4 ≤ L ≤ 5E/4: {bad} breaks over {} re-bracketings", e.len()));
    c.runtime(&r, 900.0);
    Ok(())
}

type Criterion = fn(&Path, &mut Check) -> Result<(), String>;

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 11] = [
        ("explicit rate", c01),
        ("rate sandwich", c02),
        ("short-time exponents", c03),
        ("certificate matrices", c04),
        ("tensorization", c05),
        ("ladders", c06),
        ("differential inequality", c07),
        ("Nash interpolation", c08),
        ("entropic decay", c09),
        ("Oseen scaling", c10),
        ("nonlinear VFP", c11),
    ];
    let out = std::env::temp_dir().join(format!("hypolab-acceptance-{}", std::process::id()));
    let mut failed = 0;
    for (i, (label, f)) in criteria.iter().enumerate() {
        let mut check = Check::default();
        if let Err(e) = f(&out, &mut check) {
            check.failures.push(format!("error: {e}"));
        }
        let pass = check.failures.is_empty();
        failed += usize::from(!pass);
        let detail = if pass { check.notes.join("; ") } else { check.failures.join("; ") };
        println!("criterion {:>2} {label}: {} ({detail})", i + 1, if pass { "PASS" } else { "FAIL" });
    }
    let _ = std::fs::remove_dir_all(&out);
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
