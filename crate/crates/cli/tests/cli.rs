use std::path::Path;
use std::process::{Command, Output};

fn asymspec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_asymspec"))
        .args(args)
        .env("ASYMSPEC_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn generate(dir: &Path, extra: &[&str]) {
    let out = dir.to_str().unwrap();
    let mut args = vec!["generate", "--n", "12", "--t", "240", "--seed", "3", "--out", out];
    args.extend_from_slice(extra);
    let o = asymspec(&args);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn help_exits_zero() {
    assert_eq!(asymspec(&["--help"]).status.code(), Some(0));
    assert_eq!(asymspec(&["spectrum", "--help"]).status.code(), Some(0));
}

#[test]
fn bad_usage_exits_one() {
    assert_eq!(asymspec(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(asymspec(&["maxeig", "--tau-min", "x"]).status.code(), Some(1));
    let o = asymspec(&["joint", "--out", "/tmp/unused"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--a"));
}

#[test]
fn missing_input_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    generate(dir.path(), &[]);
    let missing = dir.path().join("absent.csv");
    let o = asymspec(&[
        "spectrum",
        "--a",
        missing.to_str().unwrap(),
        "--b",
        dir.path().join("b.csv").to_str().unwrap(),
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("absent.csv"), "{}", stderr(&o));
}

#[test]
fn lag_out_of_range_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    generate(dir.path(), &[]);
    let p = |n: &str| dir.path().join(n).to_str().unwrap().to_string();
    let o = asymspec(&["maxeig", "--a", &p("a.csv"), "--b", &p("b.csv"), "--tau-max", "500", "--out", &p("o")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("lag 500"), "{}", stderr(&o));
}

#[test]
fn null_validation_passes_and_wrong_overlay_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ok");
    let o = asymspec(&["mc-validate", "--n", "50", "--t", "250", "--reps", "10", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for f in ["eigenvalues.csv", "histogram.csv", "fit_report.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let bad = dir.path().join("bad");
    let o = asymspec(&[
        "mc-validate",
        "--n",
        "50",
        "--t",
        "250",
        "--reps",
        "10",
        "--q-overlay",
        "2",
        "--out",
        bad.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn config_file_supplies_options_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    generate(dir.path(), &["--model", "factor", "--g-within", "0.4", "--g-cross", "0.3", "--lag", "1"]);
    let p = |n: &str| dir.path().join(n).to_str().unwrap().to_string();
    let cfg = dir.path().join("cfg.json");
    let body = serde_json::json!({
        "subcommand": "maxeig",
        "a": p("a.csv"),
        "b": p("b.csv"),
        "tau_min": -2,
        "tau_max": 2,
        "out": p("from_file"),
    });
    std::fs::write(&cfg, body.to_string()).unwrap();
    let o = asymspec(&["--config", cfg.to_str().unwrap(), "maxeig", "--tau-max", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("from_file/maxeig.csv")).unwrap();
    let taus: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(taus, ["-2", "-1", "0", "1", "2", "3"]);

    let o = asymspec(&["--config", cfg.to_str().unwrap(), "joint"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("maxeig"));
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"bogus": 1}"#).unwrap();
    let o = asymspec(&["--config", cfg.to_str().unwrap(), "joint"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("bogus"), "{}", stderr(&o));
}

#[test]
fn pca_reports_exact_identities() {
    let dir = tempfile::tempdir().unwrap();
    generate(dir.path(), &["--model", "factor", "--g-within", "0.5"]);
    let p = |n: &str| dir.path().join(n).to_str().unwrap().to_string();
    let o = asymspec(&["pca", "--a", &p("a.csv"), "--b", &p("b.csv"), "--boot", "2", "--subset", "10", "--out", &p("o")]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("o/pca_report.json")).unwrap()).unwrap();
    assert!(report["factorization_residual"].as_f64().unwrap() < 1e-10);
    assert!(report["reconstruction_residual"].as_f64().unwrap() < 1e-10);
    for f in ["pcs_a.csv", "pcs_b.csv", "ke_diagnostics.csv", "autocorr.csv", "pc_histogram.csv", "pc_fit_report.json"] {
        assert!(dir.path().join("o").join(f).exists(), "{f}");
    }
    let leftovers: Vec<_> = std::fs::read_dir(dir.path().join("o"))
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_name().to_string_lossy().ends_with(".tmp"))
        .collect();
    assert!(leftovers.is_empty());
}
