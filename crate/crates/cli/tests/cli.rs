use std::path::Path;
use std::process::{Command, Output};

fn cuspdisc(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cuspdisc"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.display().to_string()
}

#[test]
fn hilbert_selftest_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "h.toml",
        "experiment = \"hilbert-selftest\"\noutput = \"out/h.json\"\n",
    );
    let out = cuspdisc(dir.path(), &["run", "--config", &cfg, "--set", "n=4096"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/h.json")).unwrap())
            .unwrap();
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["config"]["n"], 4096);
    assert!(report["results"]["max_error"].as_f64().unwrap() < 1e-12);
    assert!(report["invariants"]
        .as_array()
        .unwrap()
        .iter()
        .all(|i| i["pass"] == true));
    assert!(report["version"].is_string());
}

#[test]
fn thresholds_csv_carries_reference_values() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "t.toml",
        "experiment = \"thresholds\"\nm = 2\np = 1\noutput = \"t.json\"\n",
    );
    let out = cuspdisc(dir.path(), &["run", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("thresholds.csv")).unwrap();
    let row = csv.lines().nth(1).unwrap();
    assert!(row.starts_with("2,1,1.01,"));
    assert!(row.contains("1.3333333333") && row.contains("1.4142135624"));
}

#[test]
fn calibration_violation_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "s.toml",
        "experiment = \"solve-disc\"\nmodel = \"inf-single-exp\"\na = 1.0\nb = 3.0\nn = 256\n",
    );
    let out = cuspdisc(dir.path(), &["run", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("a<b<a(a+1)"));
    assert!(!dir.path().join("solve-disc.json").exists());
}

#[test]
fn unknown_keys_and_bad_overrides_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "u.toml",
        "experiment = \"levi-check\"\nresolution = 10\n",
    );
    let out = cuspdisc(dir.path(), &["run", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("resolution"));
    let cfg = write_config(dir.path(), "v.toml", "experiment = \"levi-check\"\n");
    let out = cuspdisc(dir.path(), &["run", "--config", &cfg, "--set", "n"]);
    assert_eq!(out.status.code(), Some(2));
    let out = cuspdisc(dir.path(), &["run", "--config", "missing.toml"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn computational_failure_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    // Undamped iteration on a strongly r-coupled model with a one-step budget.
    let cfg = write_config(
        dir.path(),
        "f.toml",
        "experiment = \"solve-disc\"\nmodel = \"re-part\"\nr_coupling = 1.0\nmax_iter = 1\nn = 256\n",
    );
    let out = cuspdisc(dir.path(), &["run", "--config", &cfg]);
    assert_eq!(
        out.status.code(),
        Some(1),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "d.toml",
        "experiment = \"solve-disc\"\nn = 1024\noutput = \"d.json\"\n",
    );
    let mut outputs = Vec::new();
    for _ in 0..2 {
        assert_eq!(
            cuspdisc(dir.path(), &["run", "--config", &cfg])
                .status
                .code(),
            Some(0)
        );
        outputs.push((
            std::fs::read(dir.path().join("d.json")).unwrap(),
            std::fs::read(dir.path().join("solve-disc.csv")).unwrap(),
        ));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn list_prints_the_catalogue() {
    let dir = tempfile::tempdir().unwrap();
    let out = cuspdisc(dir.path(), &["list"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for name in [
        "hilbert-selftest",
        "sector-profile",
        "solve-disc",
        "bump-response",
        "smoothing-sweep",
        "translation-sweep",
        "levi-check",
        "cone-bump",
        "thresholds",
        "hypothesis-check",
    ] {
        assert!(text.contains(name), "{name}");
    }
}
