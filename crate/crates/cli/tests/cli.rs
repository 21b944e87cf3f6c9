use std::path::Path;
use std::process::Command;

fn hetreg() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_hetreg"));
    c.env_remove("HETREG_SEED").env_remove("HETREG_WORKERS");
    c
}

fn write_config(dir: &Path, body: &str) -> std::path::PathBuf {
    let p = dir.join("config.json");
    std::fs::write(&p, body).unwrap();
    p
}

const SMALL: &str = r#"{"n_grid": [51, 101], "reps": 10, "noise_menu": [{"kind": "gaussian"}]}"#;

#[test]
fn risk_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("risk.csv");
    let status = hetreg()
        .args(["risk", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .args(["--seed", "5", "--as-printed"])
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "estimator,noise,n,risk_empiric,se_empiric,risk_l2,se_l2,normalized_ratio,gamma_k,seed"
    );
    assert_eq!(lines.count(), 4);
    assert!(text.lines().skip(1).all(|l| l.ends_with(",5")));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.with_extension("json")).unwrap()).unwrap();
    assert!(summary["constants"]["gamma_k_as_printed"].is_number());
}

#[test]
fn env_overrides_match_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let run = |env: bool, out: &str| {
        let mut c = hetreg();
        c.arg("risk").arg("--config").arg(&cfg).arg("--out").arg(dir.path().join(out));
        if env {
            c.env("HETREG_SEED", "11").env("HETREG_WORKERS", "1");
        } else {
            c.args(["--seed", "11", "--workers", "3"]);
        }
        assert!(c.status().unwrap().success());
        std::fs::read(dir.path().join(out)).unwrap()
    };
    assert_eq!(run(true, "a.csv"), run(false, "b.csv"));
}

#[test]
fn simulate_then_estimate() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let data = dir.path().join("data.csv");
    assert!(hetreg()
        .arg("simulate")
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&data)
        .status()
        .unwrap()
        .success());
    let text = std::fs::read_to_string(&data).unwrap();
    assert!(text.starts_with("x,y\n"));
    assert_eq!(text.lines().count(), 52);
    let out = hetreg().arg("estimate").arg(&data).output().unwrap();
    assert!(out.status.success());
    let fit: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(fit["estimate"].as_array().unwrap().len(), 51);
}

#[test]
fn oracle_efficiency_lower_bound_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"n_grid": [51], "reps": 8, "fisher_reps": 8, "noise_menu": [{"kind": "gaussian"}],
            "estimators": ["adaptive", "zero"]}"#,
    );
    for cmd in ["oracle", "efficiency", "lower-bound"] {
        let out = dir.path().join(format!("{cmd}.csv"));
        let status = hetreg().arg(cmd).arg("--config").arg(&cfg).arg("--out").arg(&out).status().unwrap();
        assert!(status.success(), "{cmd}");
        assert!(out.with_extension("json").exists());
    }
}

#[test]
fn bad_input_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"n_grid": [100]}"#);
    let out = hetreg().arg("risk").arg("--config").arg(&cfg).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("odd"));
}
