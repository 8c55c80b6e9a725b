use std::fs;
use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fracpme"))
}

fn data(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn golden_pure_run_reproduces_committed_csv() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["simulate", "--config"])
        .arg(data("golden_pure.json"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(
        status.status.success(),
        "{}",
        String::from_utf8_lossy(&status.stderr)
    );
    let read = |p: &Path| -> Vec<Vec<String>> {
        let mut rd = csv::Reader::from_path(p).unwrap();
        let header: Vec<String> = rd.headers().unwrap().iter().map(String::from).collect();
        let mut rows = vec![header];
        for r in rd.records() {
            rows.push(r.unwrap().iter().map(String::from).collect());
        }
        rows
    };
    let got = read(&dir.path().join("diagnostics.csv"));
    let want = read(&data("golden_pure.csv"));
    assert_eq!(got[0], want[0]);
    assert_eq!(got.len(), want.len());
    for (g, w) in got[1..].iter().zip(&want[1..]) {
        for (a, b) in g.iter().zip(w) {
            let (a, b): (f64, f64) = (a.parse().unwrap(), b.parse().unwrap());
            assert!((a - b).abs() <= 1e-9, "{a} vs {b}");
        }
    }
    assert!(dir.path().join("fit_report.json").exists());
    assert!(fs::read_to_string(dir.path().join("plot.gp"))
        .unwrap()
        .contains("diagnostics.csv"));
}

#[test]
fn fit_report_has_required_keys() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fit.json");
    let status = bin()
        .arg("fit-rate")
        .arg(data("golden_pure.csv"))
        .arg("--config")
        .arg(data("golden_pure.json"))
        .args(["--quantity", "w2", "--window", "0.5,2"])
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(out).unwrap()).unwrap();
    for key in [
        "quantity",
        "fitted_exponent",
        "theoretical_exponent",
        "residual_rms",
        "window",
        "prefactor_mode",
        "pass",
    ] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["quantity"], "w2");
    assert_eq!(v["theoretical_exponent"], -1.0);
}

#[test]
fn malformed_config_exits_with_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.json", r#"{"equation": "pure", "n": }"#);
    let out = bin()
        .arg("simulate")
        .arg("--config")
        .arg(cfg)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn non_dominated_regime_is_rejected_with_message() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "abs.json",
        r#"{"equation":"absorption","r":3,"s":0.25,"n":64,"cfl":0.4,"t_end":1,"output_every":0.5,
            "initial":{"type":"box","mass":1,"half_width":0.5}}"#,
    );
    let out = bin()
        .arg("simulate")
        .arg("--config")
        .arg(cfg)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("r > 4 - 2s"), "{err}");
}

#[test]
fn support_escape_aborts_with_runtime_code() {
    let dir = tempfile::tempdir().unwrap();
    // physical variables spread without bound on a fixed grid
    let cfg = write(
        dir.path(),
        "escape.json",
        r#"{"equation":"pure","frame":"physical","s":0.25,"L":1.5,"n":128,"cfl":0.4,"t_end":2,"output_every":0.5,
            "initial":{"type":"box","mass":1,"half_width":0.5}}"#,
    );
    let out = bin()
        .arg("simulate")
        .arg("--config")
        .arg(cfg)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn verify_negative_control_and_empty_suite() {
    let dir = tempfile::tempdir().unwrap();
    let coarse = write(
        dir.path(),
        "coarse.json",
        r#"{"criteria":[3],"profile_n":8}"#,
    );
    let report = dir.path().join("report.json");
    let out = bin()
        .arg("verify")
        .arg("--config")
        .arg(coarse)
        .arg("--out")
        .arg(&report)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("FAIL [ 3]"));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["pass"], false);

    let empty = write(dir.path(), "empty.json", "");
    let out = bin()
        .arg("verify")
        .arg("--config")
        .arg(empty)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
}

#[test]
fn invalid_thread_count_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let empty = write(dir.path(), "empty.json", "");
    let out = bin()
        .env("FRACPME_THREADS", "zero")
        .arg("verify")
        .arg("--config")
        .arg(empty)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn profile_subcommand_writes_profile() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .arg("profile")
        .arg("--config")
        .arg(data("golden_pure.json"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["interior_residual"].as_f64().unwrap() < 1e-2);
    let text = fs::read_to_string(dir.path().join("profile.csv")).unwrap();
    assert_eq!(text.lines().count(), 129);
}
