//! End-to-end tests of the `freeholo` binary: exit-code contract, JSON
//! output shape, and byte-level determinism under a fixed seed.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_freeholo"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}",
            String::from_utf8_lossy(&out.stdout)
        )
    })
}

#[test]
fn parse_prints_canonical_form() {
    let out = run(&["parse", "x1x2-x2x1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["canonical"], "x1*x2 - x2*x1");
    assert_eq!(v["nvars"], 2);
}

#[test]
fn parse_errors_are_positioned_and_exit_1() {
    let out = run(&["parse", "--nvars", "2", "x1 + x9"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("1:6"), "stderr: {err}");
}

#[test]
fn unknown_subcommand_exits_1() {
    let out = run(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn eval_identity_colligation_returns_input_bytes() {
    let delta = fixture("ball_d1.json");
    let col = fixture("colligation_identity.json");
    let point = fixture("point_d1_n2.json");
    let out = run(&[
        "eval",
        "--delta",
        delta.to_str().unwrap(),
        "--colligation",
        col.to_str().unwrap(),
        "--point",
        point.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v = stdout_json(&out);
    assert_eq!(v["membership"], true);
    // the pass-through colligation reproduces the input matrix exactly
    let input: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&point).unwrap()).unwrap();
    assert_eq!(v["value"]["re"], input["parts"][0]["re"]);
    assert_eq!(v["value"]["im"], input["parts"][0]["im"]);
}

#[test]
fn eval_outside_domain_exits_2_with_norm() {
    let dir = tempfile::tempdir().unwrap();
    let point = dir.path().join("far.json");
    std::fs::write(
        &point,
        r#"{"dim":1,"parts":[{"rows":1,"cols":1,"re":[1.5],"im":[0.0]}]}"#,
    )
    .unwrap();
    let out = run(&[
        "eval",
        "--delta",
        fixture("ball_d1.json").to_str().unwrap(),
        "--colligation",
        fixture("colligation_identity.json").to_str().unwrap(),
        "--point",
        point.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("1.5"), "stderr must carry the norm: {err}");
    let v = stdout_json(&out);
    assert_eq!(v["membership"], false);
}

#[test]
fn eval_neumann_flag_matches_library_call() {
    let out = run(&[
        "eval",
        "--delta",
        fixture("ball_d1.json").to_str().unwrap(),
        "--colligation",
        fixture("colligation_identity.json").to_str().unwrap(),
        "--point",
        fixture("point_d1_n2.json").to_str().unwrap(),
        "--neumann",
        "20",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["neumann"]["terms_used"], 20);

    let delta = freeholo::polyparse::parse_delta(
        &std::fs::read_to_string(fixture("ball_d1.json")).unwrap(),
    )
    .unwrap();
    let col: freeholo::realization::Colligation = serde_json::from_str(
        &std::fs::read_to_string(fixture("colligation_identity.json")).unwrap(),
    )
    .unwrap();
    let x: freeholo::MatrixTuple =
        serde_json::from_str(&std::fs::read_to_string(fixture("point_d1_n2.json")).unwrap())
            .unwrap();
    let f = freeholo::realization::RealizedFunction::new(col, delta).unwrap();
    let report = f.eval_neumann(&x, 20).unwrap();
    assert_eq!(
        v["neumann"]["tail_bound"].as_f64().unwrap().to_bits(),
        report.tail_bound.to_bits()
    );
    assert_eq!(
        v["neumann"]["q"].as_f64().unwrap().to_bits(),
        report.q.to_bits()
    );
}

#[test]
fn singular_resolvent_exits_3() {
    // non-isometric colligation with D = 2: at x = 0.5 the resolvent
    // 1 - D*x is exactly singular
    let dir = tempfile::tempdir().unwrap();
    let col = dir.path().join("bad_colligation.json");
    std::fs::write(
        &col,
        r#"{"alpha":[0.0,0.0],"B":{"rows":1,"cols":1,"re":[1.0],"im":[0.0]},"C":{"rows":1,"cols":1,"re":[1.0],"im":[0.0]},"D":{"rows":1,"cols":1,"re":[2.0],"im":[0.0]},"ell":1,"I":1,"J":1}"#,
    )
    .unwrap();
    let point = dir.path().join("half.json");
    std::fs::write(
        &point,
        r#"{"dim":1,"parts":[{"rows":1,"cols":1,"re":[0.5],"im":[0.0]}]}"#,
    )
    .unwrap();
    let out = run(&[
        "eval",
        "--delta",
        fixture("ball_d1.json").to_str().unwrap(),
        "--colligation",
        col.to_str().unwrap(),
        "--point",
        point.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(3),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn missing_fixture_exits_1() {
    let out = run(&[
        "eval",
        "--delta",
        "/nonexistent/delta.json",
        "--colligation",
        fixture("colligation_identity.json").to_str().unwrap(),
        "--point",
        fixture("point_d1_n2.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn proptest_passes_on_shipped_fixtures_and_is_deterministic() {
    let delta_path = fixture("eqj55_d2.json");
    let col_path = fixture("colligation_perm_d2.json");
    let args = [
        "proptest",
        "--delta",
        delta_path.to_str().unwrap(),
        "--colligation",
        col_path.to_str().unwrap(),
        "--seed",
        "7",
        "--trials",
        "25",
        "--balanced-certified",
    ];
    let out1 = run(&args);
    assert_eq!(
        out1.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out1.stderr)
    );
    let reports = stdout_json(&out1);
    let suites: Vec<&str> = reports
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["suite"].as_str().unwrap())
        .collect();
    assert_eq!(
        suites,
        [
            "intertwining",
            "direct_sums",
            "projection_lemma",
            "series_equivalence"
        ]
    );
    assert!(reports
        .as_array()
        .unwrap()
        .iter()
        .all(|r| r["verdict"] == "pass"));

    let out2 = run(&args);
    assert_eq!(
        out1.stdout, out2.stdout,
        "same seed must give identical bytes"
    );
}

#[test]
fn proptest_strict_tolerance_exits_4() {
    let out = run(&[
        "proptest",
        "--delta",
        fixture("eqj55_d2.json").to_str().unwrap(),
        "--colligation",
        fixture("colligation_perm_d2.json").to_str().unwrap(),
        "--seed",
        "7",
        "--trials",
        "10",
        "--tol",
        "1e-30",
    ]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn proptest_without_seed_exits_1() {
    let out = run(&[
        "proptest",
        "--delta",
        fixture("eqj55_d2.json").to_str().unwrap(),
        "--colligation",
        fixture("colligation_perm_d2.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--seed"));
}

#[test]
fn sample_is_deterministic_and_in_domain() {
    let delta_path = fixture("eqj55_d2.json");
    let args = [
        "sample",
        "--delta",
        delta_path.to_str().unwrap(),
        "--seed",
        "11",
        "--dim",
        "3",
        "--count",
        "2",
        "--shrink",
        "0.6",
    ];
    let out1 = run(&args);
    assert_eq!(out1.status.code(), Some(0));
    let out2 = run(&args);
    assert_eq!(out1.stdout, out2.stdout);

    let tuples: Vec<freeholo::MatrixTuple> = serde_json::from_slice(&out1.stdout).unwrap();
    assert_eq!(tuples.len(), 2);
    let delta = freeholo::polyparse::parse_delta(
        &std::fs::read_to_string(fixture("eqj55_d2.json")).unwrap(),
    )
    .unwrap();
    for t in &tuples {
        let (member, norm) = freeholo::domain::is_member(&delta, t, 0.0).unwrap();
        assert!(member);
        assert!((norm - 0.6).abs() <= 1e-5);
    }
}

#[test]
fn expand_emits_series_components() {
    let out = run(&[
        "expand",
        "--delta",
        fixture("ball_d1.json").to_str().unwrap(),
        "--colligation",
        fixture("colligation_identity.json").to_str().unwrap(),
        "--degree",
        "5",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["K"], 5);
    let comps = v["components"].as_array().unwrap();
    assert_eq!(comps.len(), 6);
    // component 1 of the pass-through realization is the bare variable
    assert_eq!(comps[1]["terms"][0]["word"], serde_json::json!([1]));
    assert_eq!(comps[1]["terms"][0]["re"], 1.0);
}

#[test]
fn expand_with_point_attaches_growth_certificate() {
    let out = run(&[
        "expand",
        "--delta",
        fixture("ball_d1.json").to_str().unwrap(),
        "--colligation",
        fixture("colligation_identity.json").to_str().unwrap(),
        "--degree",
        "4",
        "--point",
        fixture("point_d1_n2.json").to_str().unwrap(),
        "--nodes",
        "32",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v = stdout_json(&out);
    assert!(v["M"].as_f64().unwrap() > 0.0);
    assert!(v["r"].as_f64().unwrap() > 1.0);
}

#[test]
fn csv_plot_data_goes_to_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("curve.csv");
    let out = run(&[
        "eval",
        "--delta",
        fixture("ball_d1.json").to_str().unwrap(),
        "--colligation",
        fixture("colligation_identity.json").to_str().unwrap(),
        "--point",
        fixture("point_d1_n2.json").to_str().unwrap(),
        "--neumann",
        "5",
        "--csv",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    // stdout still carries the JSON report
    let v = stdout_json(&out);
    assert_eq!(v["neumann"]["terms_used"], 5);
    let csv = std::fs::read_to_string(&path).unwrap();
    assert!(csv.starts_with("m,error,tail_bound\n"));
    assert_eq!(csv.lines().count(), 6);
}

#[test]
fn output_flag_duplicates_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.json");
    let out = run(&["parse", "x1*x1", "--output", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let file = std::fs::read(&path).unwrap();
    assert_eq!(file, out.stdout);
}
