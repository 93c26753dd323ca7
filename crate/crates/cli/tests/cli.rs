use std::path::Path;
use std::process::{Command, Output};

fn dupdiv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dupdiv")).args(args).env_remove("DD_SEED").output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn classify_reports_transient_x_star_in_region_c() {
    let o = dupdiv(&["classify", "--p", "0.8", "--q", "0.2"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let row = text.lines().find(|l| l.starts_with("X_star,")).expect("X_star row");
    assert!(row.contains("Transient"), "{row}");
    assert!(row.ends_with(",C"), "{row}");
    assert!(text.lines().any(|l| l == "process,verdict,margin,eta_star,region"));
}

#[test]
fn phase_diagram_follows_the_boundary_curves() {
    let o = dupdiv(&["phase-diagram", "--grid", "40"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    assert_eq!(lines.next(), Some("p,q,region,q1,q2"));
    let mut n = 0;
    for l in lines {
        let f: Vec<&str> = l.split(',').collect();
        let (q, q1, q2): (f64, f64, f64) = (f[1].parse().unwrap(), f[3].parse().unwrap(), f[4].parse().unwrap());
        let expect = if q < q2 { "A" } else if q < q1 { "B" } else { "C" };
        assert_eq!(f[2], expect, "{l}");
        n += 1;
    }
    assert_eq!(n, 40 * 40);
}

#[test]
fn missing_config_is_a_validation_error() {
    let o = dupdiv(&["simulate-graph", "--config", "/nonexistent/run.json", "--target-m", "10"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unknown_config_keys_are_rejected_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.json", "{\n  \"model\": {\"p\": 0.5, \"q\": 0.1},\n  \"sede\": 3\n}\n");
    let o = dupdiv(&["expected", "--config", &cfg, "--m", "20", "--trunc", "30"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("sede") && err.contains("line 3"), "{err}");
}

#[test]
fn invalid_model_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.json", r#"{"model": {"p": 1.5, "q": 0.1}}"#);
    let o = dupdiv(&["expected", "--config", &cfg, "--m", "20", "--trunc", "30"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn graph_runs_are_reproducible_and_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.json", r#"{"model": {"p": 0.5, "q": 0.1}, "seed": 7}"#);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let o = dupdiv(&[
            "--threads", "2", "simulate-graph", "--config", &cfg, "--target-m", "40", "--checkpoints", "20,40",
            "--replicas", "3", "--out", out.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    assert!(text.starts_with("# config_digest="));
    assert!(text.lines().nth(1) == Some("replica,m,degree,count"));
    // Census counts add up to m for every (replica, m).
    let mut totals = std::collections::BTreeMap::<(u64, u64), u64>::new();
    for l in text.lines().skip(2) {
        let f: Vec<u64> = l.split(',').map(|x| x.parse().unwrap()).collect();
        *totals.entry((f[0], f[1])).or_default() += f[3];
    }
    assert_eq!(totals.len(), 6);
    assert!(totals.iter().all(|(&(_, m), &n)| m == n));

    let seeded = Command::new(env!("CARGO_BIN_EXE_dupdiv"))
        .args(["simulate-graph", "--config", &cfg, "--target-m", "40", "--replicas", "3", "--out", "csv"])
        .env("DD_SEED", "8")
        .output()
        .unwrap();
    let plain = dupdiv(&["simulate-graph", "--config", &cfg, "--target-m", "40", "--replicas", "3", "--out", "csv"]);
    assert_ne!(stdout(&seeded), stdout(&plain));
}

#[test]
fn tagged_paths_are_json_lines() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.json", r#"{"model": {"p": 0.4, "q": 0.55}}"#);
    let o = dupdiv(&[
        "simulate-tagged", "--config", &cfg, "--variant", "fast", "--x0", "1", "--t-max", "10", "--checkpoints", "5,10",
        "--paths", "4", "--seed", "3",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let lines: Vec<serde_json::Value> = stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 8);
    assert!(lines.iter().all(|v| v.get("state").is_some() && v.get("z").is_some() && v.get("config_digest").is_some()));

    let o = dupdiv(&[
        "simulate-tagged", "--config", &cfg, "--variant", "discrete-weighted", "--x0", "1", "--m-max", "1000", "--paths",
        "2", "--seed", "3",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).lines().count(), 2);
}

#[test]
fn expected_distribution_sums_to_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.json", r#"{"model": {"p": 0.5, "q": 0.1}, "graph": {"m0": 5}}"#);
    let o = dupdiv(&["expected", "--config", &cfg, "--m", "100", "--trunc", "99"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let total: f64 = text.lines().skip(2).map(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-12, "{total}");
}

#[test]
fn expected_flags_a_large_deficit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.json", r#"{"model": {"p": 0.9, "q": 0.3}}"#);
    let o = dupdiv(&["expected", "--config", &cfg, "--m", "200", "--trunc", "5"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn quasi_check_passes_on_the_default_grid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.json", r#"{"model": {"p": 0.3, "q": 0.0}}"#);
    let o = dupdiv(&["quasi-check", "--config", &cfg, "--i", "1,3", "--trunc", "400"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).lines().count(), 2 + 2 * 4);
}

#[test]
fn verify_writes_a_versioned_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.json", r#"{"params": {"quasi": {"starts": [1]}}, "seed": 5}"#);
    let out = dir.path().join("report.json");
    let o = dupdiv(&["verify", "--suite", "quasi", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rep: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(rep["schema_version"], 1);
    assert_eq!(rep["experiment"], "quasi");
    assert_eq!(rep["status"], "pass");
    assert_eq!(rep["config_digest"].as_str().unwrap().len(), 64);
}

#[test]
fn verify_tolerance_failure_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.json", r#"{"params": {"quasi": {"k_max": 150, "tolerance": 1e-300}}}"#);
    let o = dupdiv(&["verify", "--suite", "quasi", "--config", &cfg, "--out", "json"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn verify_rejects_unknown_suites() {
    let o = dupdiv(&["verify", "--suite", "nonsense"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn couple_modes_emit_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.json", r#"{"model": {"p": 0.4, "q": 0.55}}"#);
    let o = dupdiv(&["couple", "--config", &cfg, "--jumps", "50", "--pairs", "2", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).lines().nth(1) == Some("pair,n,state,s,s_tilde,size,delta"));

    let o = dupdiv(&["couple", "--kind", "quantile", "--m", "100", "--b", "0.5", "--pairs", "10", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 12);

    let cfg = write_config(dir.path(), "rw.json", r#"{"model": {"p": 0.5, "q": 0.2, "r": 1.0}}"#);
    let o = dupdiv(&["couple", "--config", &cfg, "--kind", "rewiring", "--j0", "2", "--m0", "100", "--pairs", "5"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).lines().count(), 7);
}

#[test]
fn bad_flags_exit_two() {
    assert_eq!(dupdiv(&["phase-diagram", "--grid", "zero"]).status.code(), Some(2));
    assert_eq!(dupdiv(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(dupdiv(&["--threads", "0", "phase-diagram"]).status.code(), Some(2));
}
