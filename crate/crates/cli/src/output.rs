use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::{CliError, Result};

/// CSV text with a header row.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

/// Shortest round-trip exponential form, so reruns give identical bytes.
pub fn num(x: f64) -> String {
    format!("{x:e}")
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Table { name: name.to_string(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn push_nums(&mut self, row: &[f64]) {
        self.push(row.iter().map(|x| num(*x)).collect());
    }

    pub fn from_trajectory(name: &str, tr: &evolve::Trajectory) -> Self {
        let mut t = Table::new(name, &[]);
        let csv = tr.to_csv();
        let mut lines = csv.lines();
        t.header = lines.next().unwrap_or("t").split(',').map(str::to_string).collect();
        t.rows = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
        t
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }
}

/// One panel of the emitted gnuplot script.
#[derive(Clone, Debug)]
pub struct Plot {
    pub table: String,
    pub title: String,
    pub x: String,
    pub ys: Vec<String>,
    pub logx: bool,
    pub logy: bool,
}

impl Plot {
    pub fn new(table: &str, title: &str, x: &str, ys: &[&str]) -> Self {
        Plot {
            table: table.into(),
            title: title.into(),
            x: x.into(),
            ys: ys.iter().map(|s| s.to_string()).collect(),
            logx: false,
            logy: false,
        }
    }

    pub fn log(mut self, x: bool, y: bool) -> Self {
        self.logx = x;
        self.logy = y;
        self
    }
}

/// What a pipeline hands back before anything touches the file system.
#[derive(Clone, Debug, Default)]
pub struct Outcome {
    pub tables: Vec<Table>,
    /// Extra text artifacts `(suffix, contents)`.
    pub texts: Vec<(String, String)>,
    pub headline: BTreeMap<String, f64>,
    pub verdicts: BTreeMap<String, bool>,
    pub meta: BTreeMap<String, String>,
    pub plots: Vec<Plot>,
    /// `false` is a legitimate negative result (exit status 2).
    pub certified: bool,
}

impl Outcome {
    pub fn head(&mut self, key: &str, value: f64) {
        self.headline.insert(key.to_string(), value);
    }

    pub fn verdict(&mut self, key: &str, ok: bool) {
        self.verdicts.insert(key.to_string(), ok);
    }

    pub fn note(&mut self, key: &str, value: impl Into<String>) {
        self.meta.insert(key.to_string(), value.into());
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunRecord {
    pub name: String,
    pub mode: String,
    pub version: String,
    pub config: Value,
    pub seed: u64,
    pub wall_clock_seconds: f64,
    pub files: Vec<String>,
    /// Non-finite headline numbers are written as `null`.
    pub headline: BTreeMap<String, Option<f64>>,
    pub verdicts: BTreeMap<String, bool>,
    pub meta: BTreeMap<String, String>,
    pub certified: bool,
    pub exit_code: i32,
}

fn gnuplot(name: &str, plots: &[Plot], tables: &[Table]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# gnuplot script for {name}");
    let _ = writeln!(s, "set datafile separator ','\nset key autotitle columnhead\nset terminal pngcairo size 900,600");
    for (k, p) in plots.iter().enumerate() {
        let Some(t) = tables.iter().find(|t| t.name == p.table) else { continue };
        let Some(xc) = t.column(&p.x) else { continue };
        let cols: Vec<usize> = p.ys.iter().filter_map(|y| t.column(y)).collect();
        if cols.is_empty() {
            continue;
        }
        let _ = writeln!(s, "\nset output '{name}_{k}.png'\nset title '{}'\nset xlabel '{}'", p.title, p.x);
        let _ = writeln!(s, "{}set logscale x\n{}set logscale y", if p.logx { "" } else { "un" }, if p.logy { "" } else { "un" });
        let file = format!("{name}_{}.csv", t.name);
        let parts: Vec<String> =
            cols.iter().map(|c| format!("'{file}' using {}:{} with linespoints", xc + 1, c + 1)).collect();
        let _ = writeln!(s, "plot {}", parts.join(", \\\n     "));
    }
    s
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Writes tables, text artifacts, the plot script and the JSON record; returns the record.
pub fn persist(dir: &Path, name: &str, outcome: &Outcome, mut record: RunRecord) -> Result<RunRecord> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let mut files: Vec<PathBuf> = Vec::new();
    for t in &outcome.tables {
        let p = dir.join(format!("{name}_{}.csv", t.name));
        write_file(&p, &t.to_csv())?;
        files.push(p);
    }
    for (suffix, text) in &outcome.texts {
        let p = dir.join(format!("{name}_{suffix}"));
        write_file(&p, text)?;
        files.push(p);
    }
    let gp = dir.join(format!("{name}.gp"));
    write_file(&gp, &gnuplot(name, &outcome.plots, &outcome.tables))?;
    files.push(gp);
    let rec = dir.join(format!("{name}_record.json"));
    files.push(rec.clone());
    record.files = files.iter().map(|p| p.display().to_string()).collect();
    let json = serde_json::to_string_pretty(&record).map_err(|e| CliError::Io(e.to_string()))?;
    write_file(&rec, &json)?;
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_and_script_reference_each_other() {
        let mut t = Table::new("traj", &["t", "e"]);
        t.push_nums(&[0.0, 1.0]);
        t.push_nums(&[0.5, 0.25]);
        assert_eq!(t.to_csv(), "t,e\n0e0,1e0\n5e-1,2.5e-1\n");
        let s = gnuplot("run", &[Plot::new("traj", "E", "t", &["e"]).log(false, true)], &[t]);
        assert!(s.contains("'run_traj.csv' using 1:2"));
        assert!(s.contains("set logscale y"));
    }
}
