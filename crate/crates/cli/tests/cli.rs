use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mpec::reformulate::SystemDoc;
use serde_json::{json, Value};
use tempfile::TempDir;

fn mpec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mpec"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}); stderr: {}",
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

/// `f = (x-1)² + (y-1)²`, `0 ≤ x ≤ 2`, `0 ≤ y ⊥ y - x + q ≥ 0`.
fn hand_problem(q: f64) -> Value {
    json!({
        "n": 1, "m": 1,
        "objective": {"Q": [[2.0, 0.0], [0.0, 2.0]], "c": [-2.0, -2.0], "c0": 2.0},
        "Z": {"E": [[1.0, 0.0], [-1.0, 0.0]], "e": [2.0, 0.0]},
        "F": {"M": [[1.0]], "N": [[-1.0]], "q": [q]},
        "lower": {"A": [[0.0]], "B": [[-1.0]], "b": [0.0]}
    })
}

fn write(dir: &TempDir, name: &str, doc: &Value) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, serde_json::to_string_pretty(doc).unwrap()).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn solve_writes_report_to_out() {
    let dir = TempDir::new().unwrap();
    let prob = write(&dir, "prob.json", &hand_problem(1.0));
    let out = dir.path().join("r.json");
    let run = mpec(&["solve", s(&prob), "--out", s(&out)]);
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    assert!(run.stdout.is_empty());
    let report: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["problemStatus"], "solved");
    assert!((report["best"]["objective"].as_f64().unwrap() - 0.5).abs() < 1e-9);
    assert!((report["best"]["x"][0].as_f64().unwrap() - 1.5).abs() < 1e-9);
    assert_eq!(report["perRegime"].as_array().unwrap().len(), 2);
}

#[test]
fn contradictory_z_exits_infeasible() {
    let dir = TempDir::new().unwrap();
    let mut p = hand_problem(0.0);
    p["Z"]["e"] = json!([-1.0, 0.0]);
    let prob = write(&dir, "empty.json", &p);
    let run = mpec(&["solve", s(&prob)]);
    assert_eq!(code(&run), 2);
    assert_eq!(stdout_json(&run)["problemStatus"], "infeasible");
}

#[test]
fn unbounded_objective_exits_three() {
    let dir = TempDir::new().unwrap();
    let mut p = hand_problem(0.0);
    p["objective"] = json!({"Q": [[0.0, 0.0], [0.0, 0.0]], "c": [-1.0, 0.0], "c0": 0.0});
    p["Z"] = json!({"E": [], "e": []});
    let prob = write(&dir, "unb.json", &p);
    let run = mpec(&["solve", s(&prob)]);
    assert_eq!(code(&run), 3);
    assert_eq!(stdout_json(&run)["problemStatus"], "unbounded");
}

#[test]
fn nonconvex_objective_is_unsupported() {
    let dir = TempDir::new().unwrap();
    let mut p = hand_problem(0.0);
    p["objective"]["Q"] = json!([[-2.0, 0.0], [0.0, 2.0]]);
    let prob = write(&dir, "ncvx.json", &p);
    let out = dir.path().join("r.json");
    let run = mpec(&["solve", s(&prob), "--out", s(&out)]);
    assert_eq!(code(&run), 5);
    assert!(!out.exists(), "no output on failure");
    assert!(String::from_utf8_lossy(&run.stderr).contains("convex"));
}

#[test]
fn malformed_inputs_exit_four() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\"n\": 1").unwrap();
    assert_eq!(code(&mpec(&["solve", s(&bad)])), 4);

    let mut p = hand_problem(0.0);
    p["lower"]["b"] = json!([0.0, 1.0]);
    let prob = write(&dir, "mismatch.json", &p);
    let run = mpec(&["solve", s(&prob)]);
    assert_eq!(code(&run), 4);
    assert!(String::from_utf8_lossy(&run.stderr).contains("lower"));

    let run = mpec(&["solve", "builtin:nope"]);
    assert_eq!(code(&run), 4);
    assert!(String::from_utf8_lossy(&run.stderr).contains("q1"));

    assert_eq!(
        code(&mpec(&["solve", s(&dir.path().join("missing.json"))])),
        4
    );
    assert_eq!(code(&mpec(&["frobnicate"])), 4);
    assert_eq!(
        code(&mpec(&["check-cq", "builtin:q3", "--point", "0,0,x,0"])),
        4
    );
}

#[test]
fn check_cq_on_q3_origin() {
    let run = mpec(&["check-cq", "builtin:q3", "--point", "0,0,0,0"]);
    assert_eq!(code(&run), 0);
    let r = stdout_json(&run);
    assert_eq!(r["activeSet"], json!([0, 1]));
    assert_eq!(r["licq"]["verdict"], "fails");
    assert_eq!(r["licq"]["rank"], 1);
    assert_eq!(r["mfcq"]["verdict"], "holds");
    assert_eq!(r["mfcq"]["certificate"], json!([-1.0, 0.0]));
    assert_eq!(r["crcq"]["verdict"], "fails");
    assert!(r["crcq"]["witnesses"]
        .as_array()
        .unwrap()
        .iter()
        .any(|w| w["rank"] == 2));
}

#[test]
fn check_cq_seed_changes_samples_reproducibly() {
    let a = mpec(&[
        "check-cq",
        "builtin:q3",
        "--point",
        "0,0,0,0",
        "--seed",
        "7",
    ]);
    let b = mpec(&[
        "check-cq",
        "builtin:q3",
        "--point",
        "0,0,0,0",
        "--seed",
        "7",
    ]);
    let c = mpec(&["check-cq", "builtin:q3", "--point", "0,0,0,0"]);
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn check_cq_infeasible_point() {
    let run = mpec(&["check-cq", "builtin:q3", "--point", "0,0,1,0"]);
    assert_eq!(code(&run), 4);
    assert!(String::from_utf8_lossy(&run.stderr).contains("feasible"));
}

#[test]
fn reformulate_targets() {
    let dir = TempDir::new().unwrap();
    let prob = write(&dir, "orthant.json", &hand_problem(1.0));

    let run = mpec(&["reformulate", s(&prob), "--to", "normal"]);
    assert_eq!(code(&run), 0);
    let doc = stdout_json(&run);
    assert_eq!(doc["kind"], "normal_map");
    assert_eq!(doc["M"], json!([[1.0]]));
    assert_eq!(doc["N"], json!([[-1.0]]));
    assert_eq!(doc["q"], json!([1.0]));

    for (to, kind) in [("kkt", "kkt"), ("fb", "fb"), ("implicit", "implicit")] {
        let run = mpec(&["reformulate", s(&prob), "--to", to]);
        assert_eq!(
            code(&run),
            0,
            "{to}: {}",
            String::from_utf8_lossy(&run.stderr)
        );
        let doc = stdout_json(&run);
        assert_eq!(doc["kind"], kind);
        let parsed: SystemDoc = serde_json::from_value(doc.clone()).unwrap();
        assert_eq!(
            serde_json::to_value(&parsed).unwrap(),
            doc,
            "{to} round-trips"
        );
    }
}

#[test]
fn reformulate_implicit_rejects_skew_map() {
    let dir = TempDir::new().unwrap();
    let p = json!({
        "n": 1, "m": 2,
        "objective": {"Q": [[0.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]], "c": [0.0, 0.0, 0.0], "c0": 0.0},
        "Z": {"E": [], "e": []},
        "F": {"M": [[0.0, 1.0], [-1.0, 0.0]], "N": [[0.0], [0.0]], "q": [0.0, 0.0]},
        "lower": {"A": [[0.0], [0.0]], "B": [[-1.0, 0.0], [0.0, -1.0]], "b": [0.0, 0.0]}
    });
    let prob = write(&dir, "skew.json", &p);
    let run = mpec(&["reformulate", s(&prob), "--to", "implicit"]);
    assert_eq!(code(&run), 5);
    assert!(String::from_utf8_lossy(&run.stderr).contains("strongly monotone"));
}

#[test]
fn reformulate_kkt_without_constraints() {
    let dir = TempDir::new().unwrap();
    let p = json!({
        "n": 1, "m": 1,
        "objective": {"Q": [[0.0, 0.0], [0.0, 0.0]], "c": [0.0, 0.0], "c0": 0.0},
        "Z": {"E": [], "e": []},
        "F": {"M": [[1.0]], "N": [[-1.0]], "q": [0.0]},
        "lower": {"A": [], "B": [], "b": []}
    });
    let prob = write(&dir, "free.json", &p);
    let run = mpec(&["reformulate", s(&prob), "--to", "kkt"]);
    assert_eq!(code(&run), 0);
    assert_eq!(stdout_json(&run)["pairs"], 0);
    let run = mpec(&["reformulate", s(&prob), "--to", "normal"]);
    assert_eq!(code(&run), 5);
}

#[test]
fn probe_sbcq_generated_q1_sequence() {
    let run = mpec(&["probe-sbcq", "--builtin-q1", "50"]);
    assert_eq!(code(&run), 0);
    let r = stdout_json(&run);
    assert_eq!(r["verdict"], "diverging");
    let e = r["growthExponent"].as_f64().unwrap();
    assert!((e - 1.0).abs() <= 0.05);
    assert_eq!(r["multiplierNorms"].as_array().unwrap().len(), 50);
}

#[test]
fn probe_sbcq_sequence_files() {
    let dir = TempDir::new().unwrap();
    let constant: Vec<Value> = (0..10).map(|_| json!({"x": [-0.5], "y": [0.0]})).collect();
    let path = write(&dir, "const.json", &Value::Array(constant.clone()));
    let run = mpec(&["probe-sbcq", "builtin:q1", "--sequence", s(&path)]);
    assert_eq!(code(&run), 0);
    assert_eq!(stdout_json(&run)["verdict"], "bounded");

    let mut bad = constant.clone();
    bad[4] = json!({"x": [-0.5], "y": [5.0]});
    let path = write(&dir, "bad.json", &Value::Array(bad));
    let run = mpec(&["probe-sbcq", "builtin:q1", "--sequence", s(&path)]);
    assert_eq!(code(&run), 4);
    assert!(String::from_utf8_lossy(&run.stderr).contains("point 4"));

    let path = write(&dir, "short.json", &Value::Array(constant[..3].to_vec()));
    assert_eq!(
        code(&mpec(&["probe-sbcq", "builtin:q1", "--sequence", s(&path)])),
        4
    );
    assert_eq!(code(&mpec(&["probe-sbcq", "--builtin-q1", "5"])), 4);
}

#[test]
fn reaction_map_q1_grid() {
    let run = mpec(&["reaction-map", "builtin:q1", "--grid", "-1,1,41"]);
    assert_eq!(code(&run), 0);
    let doc = stdout_json(&run);
    let points = doc["points"].as_array().unwrap();
    assert_eq!(points.len(), 41);
    for p in points {
        let x = p["x"][0].as_f64().unwrap();
        let want = if x >= 0.0 { -1.0 } else { 0.0 };
        assert_eq!(p["solutions"], json!([[want]]), "x = {x}");
    }
}

#[test]
fn reaction_map_affine_modes_agree() {
    let dir = TempDir::new().unwrap();
    let prob = write(&dir, "p.json", &hand_problem(-0.5));
    let a = stdout_json(&mpec(&["reaction-map", s(&prob), "--point", "0.25"]));
    let b = stdout_json(&mpec(&[
        "reaction-map",
        s(&prob),
        "--point",
        "0.25",
        "--mode",
        "monotone",
    ]));
    let ya = a["points"][0]["solutions"][0][0].as_f64().unwrap();
    let yb = b["points"][0]["solutions"][0][0].as_f64().unwrap();
    assert!((ya - 0.75).abs() < 1e-12);
    assert!((yb - 0.75).abs() < 1e-8);
}

#[test]
fn residual_and_classify() {
    let dir = TempDir::new().unwrap();
    let mut p = hand_problem(0.0);
    p["F"]["q"] = json!([0.0]);
    let prob = write(&dir, "p.json", &p);
    let run = mpec(&["residual", s(&prob), "--point", "0,1"]);
    assert_eq!(code(&run), 0);
    assert_eq!(stdout_json(&run)["theta"], json!(0.5));

    let run = mpec(&["classify", s(&prob)]);
    assert_eq!(code(&run), 0);
    let v = stdout_json(&run);
    assert_eq!(v["class"], "strongly-monotone");
    assert_eq!(v["modulus"], json!(1.0));

    assert_eq!(code(&mpec(&["classify", "builtin:q1"])), 5);
}

#[test]
fn values_over_explicit_and_computed_sets() {
    let r = stdout_json(&mpec(&[
        "values",
        "builtin:q1",
        "--x",
        "0",
        "--responses",
        "-1;0",
    ]));
    assert_eq!(
        (r["optimistic"].as_f64(), r["pessimistic"].as_f64()),
        (Some(-1.0), Some(0.0))
    );
    let r = stdout_json(&mpec(&["values", "builtin:q1", "--x", "0"]));
    assert_eq!(
        (r["optimistic"].as_f64(), r["pessimistic"].as_f64()),
        (Some(-1.0), Some(-1.0))
    );
    assert_eq!(
        code(&mpec(&[
            "values",
            "builtin:q1",
            "--x",
            "0",
            "--responses",
            ""
        ])),
        4
    );
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let prob = write(&dir, "p.json", &hand_problem(1.0));
    for args in [
        vec!["solve", s(&prob)],
        vec!["reformulate", s(&prob), "--to", "fb"],
        vec!["check-cq", "builtin:q3", "--point", "0,0,0,0"],
        vec!["probe-sbcq", "--builtin-q1", "20"],
    ] {
        let a = dir.path().join("a.json");
        let b = dir.path().join("b.json");
        let mut first = args.clone();
        first.extend(["--out", s(&a)]);
        let mut second = args.clone();
        second.extend(["--out", s(&b)]);
        assert_eq!(code(&mpec(&first)), 0);
        assert_eq!(code(&mpec(&second)), 0);
        assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap(), "{args:?}");
    }
}

#[test]
fn solve_report_round_trips() {
    let dir = TempDir::new().unwrap();
    let prob = write(&dir, "p.json", &hand_problem(1.0));
    let run = mpec(&["solve", s(&prob)]);
    let text = String::from_utf8(run.stdout).unwrap();
    let report: mpec::global::GlobalSolveReport = serde_json::from_str(&text).unwrap();
    let again = serde_json::to_string_pretty(&report).unwrap() + "\n";
    assert_eq!(again, text);
}
