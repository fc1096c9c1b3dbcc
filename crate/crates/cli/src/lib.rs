//! Configuration-driven experiment runner behind the `hypolab` binary.
//!
//! A config is one flat JSON object with dotted keys. Common keys:
//!
//! | key | meaning |
//! |-----|---------|
//! | `mode` | `certify`, `decay`, `regularize`, `entropy`, `oseen`, `vfp` or `tensor` |
//! | `name` | output file prefix (defaults to the config file stem) |
//! | `seed` | seed of every random test vector (default 0) |
//! | `output.dir` | output directory, relative to the working directory; `HYPOLAB_OUT` overrides it |
//! | `sweep.<key>` | list of values for `<key>`; only read by `hypolab sweep` |
//!
//! Unknown keys are errors. Each run writes `<name>_<table>.csv`, `<name>.gp` (a gnuplot
//! script over those CSVs) and `<name>_record.json`.
//!
//! CSV columns per mode:
//!
//! - `certify.task = rate`: `trace` (`eval,a,b,c,objective`), plus `certificate.txt`, the
//!   `key=value` record of the 4×4 certificate matrix at the optimizing triple.
//! - `certify.task = matrices`: `matrices` (`kind,sample,alpha,beta,m,delta,a,b,c,min_eig,scaled_min_eig`).
//! - `certify.task = ladders`: `geometric` (`sample,delta,n,k,log_u`) and `nonlinear`
//!   (`point,k_in,e_bar,e,k,j,eps,path,k_used,k1,ell,feasible,a` with `a` joined by `;`).
//! - `decay`: `trajectory` (`t,l2,…,h1,twisted`).
//! - `regularize`: `short_time` and `herau` (`t,F`), `envelope` (`t,E,bound,X,Y,Z,M`) or
//!   `nash` (`sigma,lhs,rhs_core,ratio`).
//! - `entropy`: `trajectory` and `refined` (`t,entropy,fisher_v,fisher_x,mixed,energy,mass`).
//! - `oseen`: `spectrum` (`alpha,min_re,floor_ratio`).
//! - `vfp`: `trajectory` (`t,free_energy,lyapunov,l1_distance,bracket_E,a1`) and `rebrackets`.
//! - `tensor`: `toys` (`sample,gap,bound,multiplier_bound,kappa1,kappa2,lambda,cap_lambda`).
//!
//! `decay` accepts `model.potential = "file"` with `model.potential_file` naming a
//! two-column text file of `node value` lines on the uniform grid `ℓj/n` of `[0, ℓ)`
//! (`model.ell`); `#` starts a comment line. Relative paths resolve against the config
//! file's directory.

pub mod config;
pub mod output;
pub mod pipelines;
pub mod sweep;

use std::path::{Path, PathBuf};
use std::time::Instant;

pub use config::{Config, Mode};
pub use output::{Outcome, RunRecord, Table};
pub use pipelines::Plan;
pub use sweep::{sweep, SweepRecord};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config field `{field}`: {message}")]
    Config { field: String, message: String },
    #[error("{0}")]
    Io(String),
    #[error("{context}: {message}")]
    Module { context: String, message: String },
}

pub type Result<T> = std::result::Result<T, CliError>;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_CERTIFICATE: i32 = 2;

/// A validated config: everything needed to run without touching the config again.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub name: String,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub plan: Plan,
    pub echo: serde_json::Value,
}

/// The `output.dir` value unless `HYPOLAB_OUT` is set.
pub fn resolve_out_dir(configured: &str) -> PathBuf {
    match std::env::var_os("HYPOLAB_OUT") {
        Some(v) if !v.is_empty() => PathBuf::from(v),
        _ => PathBuf::from(configured),
    }
}

/// Parses and validates every key; `sweep.*` keys are rejected.
pub fn prepare(cfg: &Config, default_name: &str) -> Result<Prepared> {
    if let Some(k) = cfg.values().keys().find(|k| k.starts_with("sweep.")) {
        return Err(CliError::Config { field: k.clone(), message: "sweep keys need `hypolab sweep`".into() });
    }
    let plan = Plan::parse(cfg)?;
    let name = cfg.string_or("name", default_name)?;
    if name.is_empty() || name.contains(['/', '\\']) {
        return Err(CliError::Config { field: "name".into(), message: "must be a nonempty file-name prefix".into() });
    }
    let seed = cfg.u64_or("seed", 0)?;
    let out_dir = resolve_out_dir(&cfg.string_or("output.dir", "hypolab_out")?);
    cfg.finish()?;
    Ok(Prepared { name, seed, out_dir, plan, echo: cfg.to_json() })
}

pub fn exit_code(certified: bool) -> i32 {
    if certified {
        EXIT_OK
    } else {
        EXIT_CERTIFICATE
    }
}

/// Executes a prepared run and writes its artifacts into `p.out_dir`.
pub fn execute(p: &Prepared) -> Result<(RunRecord, Outcome)> {
    let start = Instant::now();
    let outcome = p.plan.execute(p.seed)?;
    let record = RunRecord {
        name: p.name.clone(),
        mode: p.plan.mode().name().to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: p.echo.clone(),
        seed: p.seed,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        files: Vec::new(),
        headline: outcome.headline.iter().map(|(k, v)| (k.clone(), v.is_finite().then_some(*v))).collect(),
        verdicts: outcome.verdicts.clone(),
        meta: outcome.meta.clone(),
        certified: outcome.certified,
        exit_code: exit_code(outcome.certified),
    };
    let record = output::persist(&p.out_dir, &p.name, &outcome, record)?;
    Ok((record, outcome))
}

fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "run".into())
}

/// `hypolab run`: load, validate, execute, persist.
pub fn run_file(path: &Path) -> Result<(RunRecord, Outcome)> {
    let cfg = Config::load(path)?;
    execute(&prepare(&cfg, &stem(path))?)
}

/// `hypolab validate`: everything up to, but not including, computation. A config with
/// `sweep.*` keys is validated at every point of the sweep.
pub fn validate_file(path: &Path) -> Result<Vec<Prepared>> {
    let cfg = Config::load(path)?;
    if cfg.values().keys().any(|k| k.starts_with("sweep.")) {
        let (_, points) = sweep::expand(&cfg)?;
        points.iter().map(|(_, c)| prepare(c, &stem(path))).collect()
    } else {
        Ok(vec![prepare(&cfg, &stem(path))?])
    }
}

/// `hypolab sweep`.
pub fn sweep_file(path: &Path, workers: Option<usize>) -> Result<SweepRecord> {
    let cfg = Config::load(path)?;
    sweep(&cfg, &stem(path), workers)
}
