use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_robust-stopping"));
    c.env_remove("ROBUST_STOPPING_WORKERS");
    c
}

fn config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/configs").join(name)
}

fn run(cfg: &Path, out: &Path) -> Output {
    bin().arg("run").arg(cfg).arg("--out").arg(out).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn modified(name: &str, dir: &Path, edit: impl FnOnce(&mut serde_json::Value)) -> PathBuf {
    let mut v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(config(name)).unwrap()).unwrap();
    edit(&mut v);
    let path = dir.join(format!("edited-{name}"));
    std::fs::write(&path, serde_json::to_string(&v).unwrap()).unwrap();
    path
}

#[test]
fn constant_example_passes_with_value_c() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("constant");
    let o = run(&config("constant.json"), &out);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    for f in ["values.json", "ledger.csv", "gamma_star.json", "policy.json", "boundary.csv", "report.md", "envelope.json"] {
        assert!(out.join(f).exists(), "missing {f}");
    }
    let report = std::fs::read_to_string(out.join("report.md")).unwrap();
    assert!(report.contains("Robust value: 2\n"));
    assert!(report.contains("Overall: PASS"));

    let t = bin().args(["table"]).arg(&out).arg("convergence").output().unwrap();
    assert_eq!(t.status.code(), Some(0));
    let table = stdout(&t);
    let mut lines = table.lines();
    assert_eq!(lines.next(), Some("series,n,k,value"));
    for line in lines {
        assert!(line.ends_with(",2"), "{line}");
    }
}

#[test]
fn tiny_example_reports_oracle_and_ledger_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("tiny");
    let o = run(&config("oracle_tiny.json"), &out);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let report = std::fs::read_to_string(out.join("report.md")).unwrap();
    assert!(report.contains("Oracle agreement:") && report.contains("max abs diff"));

    let t = bin().arg("table").arg(&out).arg("ledger").output().unwrap();
    let csv = stdout(&t);
    for id in ["eh137", "eh137b", "et317"] {
        let rows: Vec<&str> = csv.lines().filter(|l| l.starts_with(&format!("{id},"))).collect();
        assert!(!rows.is_empty(), "no rows for {id}");
        assert!(rows.iter().all(|r| r.ends_with(",true")), "{id}: {rows:?}");
    }

    let o = bin().arg("oracle").arg(config("oracle_tiny.json")).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["pass"], serde_json::Value::Bool(true));
}

#[test]
fn wedge_example_emits_two_dimensional_boundary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("wedge");
    let o = run(&config("eg_rm_wedge.json"), &out);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let t = bin().arg("table").arg(&out).arg("boundary").output().unwrap();
    let csv = stdout(&t);
    assert!(csv.starts_with("step,time,node,x0,x1,envelope,payoff,matured,exercise\n"));
    assert!(csv.lines().count() > 100);
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin().arg("table").arg(dir.path()).arg("histogram").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(bin().output().unwrap().status.code(), Some(2));
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"name\": 3}").unwrap();
    assert_eq!(run(&bad, &dir.path().join("x")).status.code(), Some(2));
    let o = bin().env("ROBUST_STOPPING_WORKERS", "many").arg("oracle").arg(config("oracle_tiny.json")).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn cap_and_io_errors_have_their_own_codes() {
    let dir = tempfile::tempdir().unwrap();
    let capped = modified("oracle_tiny.json", dir.path(), |v| v["caps"] = serde_json::json!({"nodes": 10}));
    let o = run(&capped, &dir.path().join("x"));
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cap exceeded"));
    assert_eq!(run(&dir.path().join("missing.json"), &dir.path().join("y")).status.code(), Some(4));
    let o = bin().arg("table").arg(dir.path().join("nowhere")).arg("ledger").output().unwrap();
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn failing_check_exits_one_but_still_writes_results() {
    let dir = tempfile::tempdir().unwrap();
    let tight = modified("oracle_tiny.json", dir.path(), |v| {
        v["payoff"]["modulus"] = serde_json::json!({"kind": "explicit", "c": 0.01, "p1": 1.0, "p2": 1.0});
    });
    let out = dir.path().join("tight");
    let o = run(&tight, &out);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    let report = std::fs::read_to_string(out.join("report.md")).unwrap();
    assert!(report.contains("| payoff_modulus | check | fail |"));
}

#[test]
fn worker_count_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .env("ROBUST_STOPPING_WORKERS", "2")
        .arg("run")
        .arg(config("oracle_tiny.json"))
        .arg("--out")
        .arg(dir.path().join("w"))
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let a = std::fs::read(dir.path().join("w/values.json")).unwrap();
    let o = bin().args(["--workers", "1", "run"]).arg(config("oracle_tiny.json")).arg("--out").arg(dir.path().join("v")).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(a, std::fs::read(dir.path().join("v/values.json")).unwrap());
}
