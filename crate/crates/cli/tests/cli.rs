use std::fs;
use std::process::{Command, Output};

fn prodgrid(args: &[&str], workers: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_prodgrid"));
    cmd.args(args).env_remove("PRODGRID_WORKERS");
    if let Some(w) = workers {
        cmd.env("PRODGRID_WORKERS", w);
    }
    cmd.output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn list_shows_catalog() {
    let o = prodgrid(&["list"], None);
    assert!(o.status.success());
    let text = stdout(&o);
    for name in ["perm-empirical-failure", "grid-hitting", "pge-end-to-end", "aggregation-constant"] {
        assert!(text.contains(name), "{name} missing");
    }
    assert!(text.contains("[calibrates c0]"));
}

#[test]
fn passing_run_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("kl.json");
    let o = prodgrid(&["run", "kl-bounds", "--out", out.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("PASS [A7]"));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(json["passed"], true);
    assert!(out.with_extension("csv").exists());
}

#[test]
fn failing_assertion_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"scenario": "deviation-scaling", "m_sweep": [], "trials": 2}"#).unwrap();
    let o = prodgrid(&["run", "deviation-scaling", "--config", cfg.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("FAIL"));
}

#[test]
fn errors_exit_two() {
    assert_eq!(prodgrid(&["run", "no-such-scenario"], None).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"trials": 3, "colour": "blue"}"#).unwrap();
    let o = prodgrid(&["run", "kl-bounds", "--config", cfg.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("colour"));
    fs::write(&cfg, r#"{"scenario": "ssp-audit"}"#).unwrap();
    let o = prodgrid(&["run", "kl-bounds", "--config", cfg.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn workers_do_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"n": 16, "m": 2, "seed": 9}"#).unwrap();
    let mut devs = Vec::new();
    for w in ["1", "4"] {
        let out = dir.path().join(format!("w{w}.json"));
        let o = prodgrid(
            &[
                "run",
                "perm-empirical-failure",
                "--config",
                cfg.to_str().unwrap(),
                "--trials",
                "50",
                "--out",
                out.to_str().unwrap(),
            ],
            Some(w),
        );
        assert!(o.status.code().is_some());
        let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
        assert_eq!(json["params"]["trials"], 50);
        devs.push(json["reports"][0]["deviations"].clone());
    }
    assert_eq!(devs[0], devs[1]);
}

#[test]
fn calibrate_easy_target() {
    let o = prodgrid(
        &[
            "calibrate",
            "perm-product-success",
            "--eps",
            "0.9",
            "--delta",
            "0.9",
            "--trials",
            "5",
            "--grid",
            "0.5,0.25,1",
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(0));
    let cal: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(cal["chosen"], 0.25);
    assert_eq!(cal["trials"], 5);
}
