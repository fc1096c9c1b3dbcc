use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use crate::output::num;
use crate::pipelines::loglog_slope;
use crate::{execute, prepare, resolve_out_dir, CliError, Config, Result, RunRecord, EXIT_CERTIFICATE, EXIT_ERROR, EXIT_OK};

pub const MAX_RUNS: usize = 10_000;

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub index: usize,
    pub values: Vec<Value>,
    /// `ok`, `certificate_failure` or `error`.
    pub status: String,
    pub record: Option<RunRecord>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRecord {
    pub name: String,
    pub swept: Vec<String>,
    pub rows: Vec<SweepRow>,
    pub aggregate: PathBuf,
    /// Log-log slope of `min_re` against `oseen.alpha`, for Oseen sweeps over the coupling.
    pub loglog_exponent: Option<f64>,
    pub exit_code: i32,
}

fn cmp_values(a: &Value, b: &Value) -> Option<Ordering> {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => x.as_f64()?.partial_cmp(&y.as_f64()?),
        (Value::String(x), Value::String(y)) => Some(x.cmp(y)),
        (Value::Bool(x), Value::Bool(y)) => Some(x.cmp(y)),
        _ => None,
    }
}

/// Swept keys in sorted order and every point of their cartesian product, first key outermost.
pub fn expand(cfg: &Config) -> Result<(Vec<String>, Vec<(Vec<Value>, Config)>)> {
    let mut base = cfg.clone();
    let swept = base.remove_prefix("sweep.");
    if swept.is_empty() || swept.len() > 2 {
        return Err(CliError::Config { field: "sweep".into(), message: format!("need one or two sweep.* keys, found {}", swept.len()) });
    }
    let mut keys = Vec::new();
    let mut lists = Vec::new();
    for (k, v) in swept {
        let mut list = v.as_array().filter(|a| !a.is_empty()).cloned().ok_or_else(|| CliError::Config {
            field: k.clone(),
            message: "expected a nonempty list".into(),
        })?;
        for w in list.windows(2) {
            if cmp_values(&w[0], &w[1]).is_none() {
                return Err(CliError::Config { field: k.clone(), message: "values must be all numbers, all strings or all booleans".into() });
            }
        }
        list.sort_by(|a, b| cmp_values(a, b).unwrap_or(Ordering::Equal));
        let target = k["sweep.".len()..].to_string();
        if target.is_empty() || target.starts_with("sweep.") {
            return Err(CliError::Config { field: k, message: "does not name a config key".into() });
        }
        keys.push(target);
        lists.push(list);
    }
    let total: usize = lists.iter().map(Vec::len).product();
    if total > MAX_RUNS {
        return Err(CliError::Config { field: "sweep".into(), message: format!("{total} runs exceed the limit of {MAX_RUNS}") });
    }
    let mut points = Vec::with_capacity(total);
    for i in 0..total {
        let mut rem = i;
        let mut idx = vec![0; lists.len()];
        for d in (0..lists.len()).rev() {
            idx[d] = rem % lists[d].len();
            rem /= lists[d].len();
        }
        let values: Vec<Value> = idx.iter().zip(&lists).map(|(j, l)| l[*j].clone()).collect();
        let mut c = base.clone();
        for (k, v) in keys.iter().zip(&values) {
            c.set(k, v.clone());
        }
        points.push((values, c));
    }
    Ok((keys, points))
}

fn cell(v: &Value) -> String {
    match v {
        Value::Number(n) => n.as_f64().map(num).unwrap_or_else(|| n.to_string()),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Runs every point on a pool of `workers` threads and writes the aggregate CSV.
pub fn sweep(cfg: &Config, default_name: &str, workers: Option<usize>) -> Result<SweepRecord> {
    let (keys, points) = expand(cfg)?;
    // Name and directory come from the unswept keys, so a bad point cannot abort the sweep.
    let name = cfg.values().get("name").and_then(Value::as_str).unwrap_or(default_name).to_string();
    let out_dir = resolve_out_dir(cfg.values().get("output.dir").and_then(Value::as_str).unwrap_or("hypolab_out"));
    let width = points.len().to_string().len();
    let workers = workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()).min(8)).max(1);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build().map_err(|e| CliError::Io(e.to_string()))?;
    // Validation is cheap and touches the non-`Sync` config, so it runs up front.
    let prepared: Vec<(Vec<Value>, Result<crate::Prepared>)> = points
        .into_iter()
        .enumerate()
        .map(|(i, (values, c))| {
            let p = prepare(&c, default_name).map(|mut p| {
                p.name = format!("{name}_{i:0width$}");
                p.out_dir = out_dir.join(format!("{name}_sweep"));
                p
            });
            (values, p)
        })
        .collect();
    let rows: Vec<SweepRow> = pool.install(|| {
        prepared
            .par_iter()
            .enumerate()
            .map(|(i, (values, p))| {
                let result = match p {
                    Ok(p) => execute(p).map(|(r, _)| r).map_err(|e| e.to_string()),
                    Err(e) => Err(e.to_string()),
                };
                match result {
                    Ok(r) => SweepRow {
                        index: i,
                        values: values.clone(),
                        status: if r.certified { "ok" } else { "certificate_failure" }.into(),
                        record: Some(r),
                        error: None,
                    },
                    Err(e) => SweepRow { index: i, values: values.clone(), status: "error".into(), record: None, error: Some(e) },
                }
            })
            .collect()
    });

    let heads: BTreeSet<String> = rows.iter().filter_map(|r| r.record.as_ref()).flat_map(|r| r.headline.keys().cloned()).collect();
    let mut csv = String::from("index");
    for k in &keys {
        csv.push(',');
        csv.push_str(k);
    }
    csv.push_str(",status");
    for h in &heads {
        csv.push(',');
        csv.push_str(h);
    }
    csv.push_str(",error\n");
    for r in &rows {
        let mut line = vec![r.index.to_string()];
        line.extend(r.values.iter().map(cell));
        line.push(r.status.clone());
        for h in &heads {
            let v = r.record.as_ref().and_then(|rec| rec.headline.get(h).copied().flatten());
            line.push(v.map(num).unwrap_or_default());
        }
        line.push(r.error.as_deref().unwrap_or("").replace([',', '\n'], ";"));
        csv.push_str(&line.join(","));
        csv.push('\n');
    }
    let loglog_exponent = if keys == ["oseen.alpha"] {
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .filter_map(|r| Some((r.values[0].as_f64()?, r.record.as_ref()?.headline.get("min_re").copied().flatten()?)))
            .collect();
        (pts.len() >= 2).then(|| {
            let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
            loglog_slope(&x, &y)
        })
    } else {
        None
    };
    if let Some(e) = loglog_exponent {
        csv.push_str(&format!("# loglog_exponent={}\n", num(e)));
    }
    std::fs::create_dir_all(&out_dir).map_err(|e| CliError::Io(format!("{}: {e}", out_dir.display())))?;
    let aggregate = out_dir.join(format!("{name}_sweep.csv"));
    std::fs::write(&aggregate, csv).map_err(|e| CliError::Io(format!("{}: {e}", aggregate.display())))?;
    let exit_code = if rows.iter().any(|r| r.status == "error") {
        EXIT_ERROR
    } else if rows.iter().any(|r| r.status == "certificate_failure") {
        EXIT_CERTIFICATE
    } else {
        EXIT_OK
    };
    let record = SweepRecord { name: name.clone(), swept: keys, rows, aggregate, loglog_exponent, exit_code };
    let rec_path = out_dir.join(format!("{name}_sweep_record.json"));
    let json = serde_json::to_string_pretty(&record).map_err(|e| CliError::Io(e.to_string()))?;
    std::fs::write(&rec_path, json).map_err(|e| CliError::Io(format!("{}: {e}", rec_path.display())))?;
    Ok(record)
}
