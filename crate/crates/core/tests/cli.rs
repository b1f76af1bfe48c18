//! End-to-end behaviour of the `opo-noise` binary.

use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_opo-noise"))
        .args(args)
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn bundled_data() -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("data/single-beam-synthetic.csv")
        .display()
        .to_string()
}

#[test]
fn fit_recovers_bundled_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fit.json");
    let o = run(&[
        "fit",
        "--data",
        &bundled_data(),
        "--format",
        "json",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let p_th = doc["result"]["p_th_uW"].as_f64().unwrap();
    assert!((p_th / 12.3 - 1.0).abs() < 0.05, "{p_th}");
    assert_eq!(doc["curve"]["power_uW"].as_array().unwrap().len(), 200);
    assert_eq!(doc["input"]["points"].as_array().unwrap().len(), 20);
    let curve = std::fs::read_to_string(dir.path().join("fit.curve.csv")).unwrap();
    assert_eq!(curve.lines().count(), 201);
    assert_eq!(curve.lines().next().unwrap(), "power_uW,variance_snu");
}

#[test]
fn malformed_row_names_line_and_column() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("bad.csv");
    std::fs::write(
        &data,
        "power_uW,variance_snu\n15,1.1\n20,1.05\n30,oops\n40,0.98\n",
    )
    .unwrap();
    let out = dir.path().join("fit.json");
    let o = run(&[
        "fit",
        "--data",
        data.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(!o.status.success());
    let msg = stderr(&o);
    assert!(
        msg.contains("line 4") && msg.contains("variance_snu"),
        "{msg}"
    );
    assert!(!out.exists());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn equal_weights_match_absent_weights() {
    let dir = tempfile::tempdir().unwrap();
    let plain = std::fs::read_to_string(bundled_data()).unwrap();
    let mut weighted = String::from("power_uW,variance_snu,weight\n");
    for line in plain.lines().skip(1) {
        weighted.push_str(&format!("{line},2.5\n"));
    }
    let wpath = dir.path().join("weighted.csv");
    std::fs::write(&wpath, weighted).unwrap();
    let a = run(&["fit", "--data", &bundled_data()]);
    let b = run(&["fit", "--data", wpath.to_str().unwrap()]);
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn non_convergence_exits_nonzero_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fit.json");
    let o = run(&[
        "fit",
        "--data",
        &bundled_data(),
        "--max-iterations",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("did not converge"), "{}", stderr(&o));
    assert!(!out.exists());
}

#[test]
fn unwritable_output_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("missing").join("v.csv");
    let o = run(&["variance", "--out", out.to_str().unwrap()]);
    assert!(!o.status.success());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn params_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let mut params: serde_json::Value =
        serde_json::from_str(include_str!("../presets/paper-defaults.json")).unwrap();
    params["cavity"]["coupling_ratio"] = serde_json::json!(0.5);
    params["eta_twin"] = serde_json::json!(1.0);
    let path = dir.path().join("p.json");
    std::fs::write(&path, serde_json::to_string(&params).unwrap()).unwrap();
    let p = path.to_str().unwrap();

    let from_file = run(&["variance", "--params", p, "--count", "1"]);
    let line = String::from_utf8(from_file.stdout).unwrap();
    assert!(
        line.lines()
            .nth(1)
            .unwrap()
            .starts_with("1.10000000,0.632352941,"),
        "{line}"
    );
    let flagged = run(&[
        "variance",
        "--params",
        p,
        "--coupling-ratio",
        "0.22",
        "--eta-twin",
        "0.87",
        "--count",
        "1",
    ]);
    let line = String::from_utf8(flagged.stdout).unwrap();
    assert!(
        line.lines()
            .nth(1)
            .unwrap()
            .starts_with("1.10000000,0.859264706,"),
        "{line}"
    );
    let missing = run(&["variance", "--params", "/nonexistent.json"]);
    assert!(!missing.status.success());
}

#[test]
fn relax_reports_window() {
    let o = run(&["relax", "--min", "2", "--max", "3", "--count", "11"]);
    assert!(o.status.success());
    assert!(stderr(&o).contains("[2.40625000, 2.76180556]"));
    let csv = String::from_utf8(o.stdout).unwrap();
    assert_eq!(csv.matches("below-threshold").count(), 5);
}

#[test]
fn simulate_rejects_undersampling() {
    let o = run(&["simulate", "--sample-rate", "8", "--duration", "1"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("sample rate"), "{}", stderr(&o));
}

#[test]
fn seed_changes_monte_carlo_output() {
    let a = run(&["sweep", "--monte-carlo", "--seed", "1"]);
    let b = run(&["sweep", "--monte-carlo", "--seed", "2"]);
    assert!(a.status.success() && b.status.success());
    assert_ne!(a.stdout, b.stdout);
}
