use std::path::{Path, PathBuf};
use std::process::Command;

fn scratch(tag: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("hypolab-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn hypolab(args: &[&str], out: &Path) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_hypolab")).args(args).env("HYPOLAB_OUT", out).output().unwrap().status.code().unwrap()
}

const MATRICES: &str = r#"{"mode": "certify", "certify.task": "matrices", "certify.samples": 50, "seed": 11}"#;

#[test]
fn exit_codes() {
    let d = scratch("exit");
    let empty = config(&d, "empty.json", "{}");
    assert_eq!(hypolab(&["validate", empty.to_str().unwrap()], &d), 1);
    let nested = config(&d, "nested.json", r#"{"mode": "oseen", "oseen": {"n": 64}}"#);
    assert_eq!(hypolab(&["validate", nested.to_str().unwrap()], &d), 1);
    let typo = config(&d, "typo.json", r#"{"mode": "certify", "certify.task": "matrices", "certify.sample": 5}"#);
    assert_eq!(hypolab(&["run", typo.to_str().unwrap()], &d), 1);

    let good = config(&d, "good.json", MATRICES);
    assert_eq!(hypolab(&["validate", good.to_str().unwrap()], &d), 0);
    assert_eq!(hypolab(&["run", good.to_str().unwrap()], &d), 0);
    assert!(d.join("good_matrices.csv").exists() && d.join("good_record.json").exists() && d.join("good.gp").exists());

    // An α-floor steeper than the measured growth is a certificate failure.
    let floor = config(
        &d,
        "floor.json",
        r#"{"mode": "oseen", "oseen.profile": "inv_quadratic", "oseen.n": 64, "oseen.alphas": [10.0, 100.0], "oseen.floor_exponent": 1.0}"#,
    );
    assert_eq!(hypolab(&["run", floor.to_str().unwrap()], &d), 2);
    let _ = std::fs::remove_dir_all(&d);
}

#[test]
fn csvs_are_reproducible() {
    let d = scratch("repro");
    let cfg = config(&d, "m.json", MATRICES);
    let (a, b) = (d.join("a"), d.join("b"));
    assert_eq!(hypolab(&["run", cfg.to_str().unwrap()], &a), 0);
    assert_eq!(hypolab(&["run", cfg.to_str().unwrap()], &b), 0);
    let first = std::fs::read(a.join("m_matrices.csv")).unwrap();
    assert_eq!(first, std::fs::read(b.join("m_matrices.csv")).unwrap());
    let other = config(&d, "n.json", &MATRICES.replace("11", "12"));
    assert_eq!(hypolab(&["run", other.to_str().unwrap()], &a), 0);
    assert_ne!(first, std::fs::read(a.join("n_matrices.csv")).unwrap());
    let _ = std::fs::remove_dir_all(&d);
}

#[test]
fn sweep_writes_aggregate() {
    let d = scratch("sweep");
    let cfg = config(
        &d,
        "s.json",
        r#"{"mode": "oseen", "oseen.profile": "inv_quadratic", "oseen.n": 48, "oseen.floor_exponent": 0.25, "sweep.oseen.alpha": [40.0, 10.0, 20.0]}"#,
    );
    assert_eq!(hypolab(&["validate", cfg.to_str().unwrap()], &d), 0);
    assert_eq!(hypolab(&["sweep", "--workers", "2", cfg.to_str().unwrap()], &d), 0);
    let csv = std::fs::read_to_string(d.join("s_sweep.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert!(rows[0].starts_with("index,oseen.alpha,status"));
    assert!(rows[1].starts_with("0,1e1,ok") && rows[3].starts_with("2,4e1,ok"));
    assert!(rows.last().unwrap().starts_with("# loglog_exponent="));
    let _ = std::fs::remove_dir_all(&d);
}
