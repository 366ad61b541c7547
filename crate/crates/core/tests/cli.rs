//! End-to-end checks of the `qesl` binary: exit codes, CSV and SVG contents.

use std::collections::BTreeSet;
use std::path::Path;
use std::process::{Command, Output};

fn qesl(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qesl"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

const REFERENCE: &str = r#"{"scenario":"nonlocal","parameters":{"p":0,"delta":0.1,"theta":3.5},
    "outputs":{"csv":"out.csv","svg":"out.svg"}}"#;

#[test]
fn reference_config_writes_one_row_per_node() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cfg.json", REFERENCE);
    let out = qesl(&["run", "--config", &cfg], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("out.csv")).unwrap();
    assert!(csv.starts_with(
        "t,F_E_nats,F_E_bits,rate_lhs,speed_term,surprisal_term,css_correction,bound_total,lambda_cum,t_esl_cum,bound_kind\n"
    ));
    assert!(!csv.contains('\r'));
    let rows = rows(&csv);
    // 400 steps give 401 nodes including both ends.
    assert_eq!(rows.len(), 401);
    let t: Vec<f64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert!(t.windows(2).all(|w| w[1] > w[0]));
    assert_eq!((t[0], t[400]), (0.0, 2.0));
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["nodes"], 401);
    assert_eq!(summary["bound_kind"], "unitary");
}

#[test]
fn t_esl_column_is_reproduced_from_its_own_columns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cfg.json", REFERENCE);
    assert!(qesl(&["run", "--config", &cfg], dir.path()).status.success());
    let csv = std::fs::read_to_string(dir.path().join("out.csv")).unwrap();
    let rows = rows(&csv);
    let f0: f64 = rows[0][1].parse().unwrap();
    for r in &rows[1..] {
        let f: f64 = r[1].parse().unwrap();
        let lambda: f64 = r[8].parse().unwrap();
        let esl: f64 = r[9].parse().unwrap();
        let recomputed = (f - f0).abs() / lambda;
        assert!(
            (recomputed - esl).abs() <= 1e-12 * esl.abs().max(1e-300),
            "t = {}: {recomputed} vs {esl}",
            r[0]
        );
    }
}

#[test]
fn svg_holds_exactly_the_named_series() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cfg.json", REFERENCE);
    assert!(qesl(&["run", "--config", &cfg], dir.path()).status.success());
    let svg = std::fs::read_to_string(dir.path().join("out.svg")).unwrap();
    let ids: BTreeSet<&str> = svg
        .match_indices("<g id=\"")
        .map(|(i, m)| {
            let rest = &svg[i + m.len()..];
            &rest[..rest.find('"').unwrap()]
        })
        .collect();
    assert_eq!(ids, BTreeSet::from(["rate-bound", "rate-lhs", "t-esl", "t-reference"]));
    // every node is drawn: 401 points per series on the unsplit curves
    let t_esl = &svg[svg.find("id=\"t-esl\"").unwrap()..];
    let group = &t_esl[..t_esl.find("</g>").unwrap()];
    let points: usize = group
        .split("points=\"")
        .skip(1)
        .map(|p| p[..p.find('"').unwrap()].split_whitespace().count())
        .sum();
    assert_eq!(points, 401);
}

#[test]
fn flags_and_config_give_the_same_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cfg.json", REFERENCE);
    assert!(qesl(&["run", "--config", &cfg, "--csv", "a.csv"], dir.path())
        .status
        .success());
    let out = qesl(
        &[
            "scenario", "nonlocal", "--p", "0", "--delta", "0.1", "--theta", "3.5", "--t1", "2", "--steps", "400",
            "--csv", "b.csv",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(
        std::fs::read(dir.path().join("a.csv")).unwrap(),
        std::fs::read(dir.path().join("b.csv")).unwrap()
    );
}

#[test]
fn exit_codes_by_error_class() {
    let dir = tempfile::tempdir().unwrap();
    let zero = write(
        dir.path(),
        "zero.json",
        r#"{"scenario":"dephasing","parameters":{"p":0.5,"gamma":1},"grid":{"steps":0}}"#,
    );
    let out = qesl(&["run", "--config", &zero], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("grid.steps"));

    let out = qesl(
        &["scenario", "dephasing", "--p", "0.5", "--gamma", "1", "--steps", "0"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));

    let bad_p = write(
        dir.path(),
        "p.json",
        r#"{"scenario":"nonlocal","parameters":{"p":1.5,"delta":0.1,"theta":3.5}}"#,
    );
    let out = qesl(&["run", "--config", &bad_p], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("parameters.p"));

    let out = qesl(&["run", "--config", "missing.json"], dir.path());
    assert_eq!(out.status.code(), Some(4));

    let unwritable = write(
        dir.path(),
        "w.json",
        r#"{"scenario":"dephasing","parameters":{"p":0.5,"gamma":1},"outputs":{"csv":"no/such/dir/out.csv"}}"#,
    );
    let out = qesl(&["run", "--config", &unwritable], dir.path());
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn ree_command_reads_a_matrix_literal() {
    let dir = tempfile::tempdir().unwrap();
    let state = write(
        dir.path(),
        "bell.json",
        "[[0.5,0,0,0.5],[0,0,0,0],[0,0,0,0],[0.5,0,0,[0.5,0]]]",
    );
    let out = qesl(&["ree", "--state", &state, "--restarts", "3"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let nats = v["value_nats"].as_f64().unwrap();
    assert!((nats - std::f64::consts::LN_2).abs() < 1e-3, "{nats}");
    assert!((v["value_bits"].as_f64().unwrap() - 1.0).abs() < 2e-3);

    let explicit = qesl(
        &["ree", "--state", &state, "--restarts", "3", "--dims", "2,2"],
        dir.path(),
    );
    assert_eq!(explicit.stdout, out.stdout);

    let not_a_state = write(dir.path(), "neg.json", "[[1.5,0],[0,-0.5]]");
    let out = qesl(&["ree", "--state", &not_a_state, "--dims", "1,2"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("config error at `state`"));
    let out = qesl(&["ree", "--state", &state, "--dims", "4"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}
