use std::fs;

use prodgrid::experiments::{
    calibrate_constants, catalog, curve_csv, emit_report, run_scenario, ExperimentConfig,
};
use prodgrid::Error;

fn quick(name: &str, trials: usize) -> ExperimentConfig {
    ExperimentConfig {
        trials: Some(trials),
        ..ExperimentConfig::for_scenario(name)
    }
}

fn strip_wall(v: &mut serde_json::Value) {
    match v {
        serde_json::Value::Object(map) => {
            map.remove("wall_ms");
            map.values_mut().for_each(strip_wall);
        }
        serde_json::Value::Array(a) => a.iter_mut().for_each(strip_wall),
        _ => {}
    }
}

#[test]
fn catalog_is_tagged() {
    let mut names: Vec<_> = catalog().iter().map(|s| s.name).collect();
    assert_eq!(names.len(), 13);
    names.sort();
    names.dedup();
    assert_eq!(names.len(), 13);
    for s in catalog() {
        assert!(s.criterion.starts_with('A'));
        assert!(!s.claim.is_empty());
    }
}

#[test]
fn reports_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig {
        n: Some(20),
        m: Some(3),
        ..quick("perm-empirical-failure", 40)
    };
    let a = run_scenario(&cfg).unwrap();
    let b = run_scenario(&cfg).unwrap();
    assert_eq!(a.reports[0].deviations, b.reports[0].deviations);

    let pa = dir.path().join("a.json");
    let pb = dir.path().join("b.json");
    emit_report(&a, &pa).unwrap();
    emit_report(&b, &pb).unwrap();
    let mut ja: serde_json::Value = serde_json::from_str(&fs::read_to_string(&pa).unwrap()).unwrap();
    let mut jb: serde_json::Value = serde_json::from_str(&fs::read_to_string(&pb).unwrap()).unwrap();
    strip_wall(&mut ja);
    strip_wall(&mut jb);
    assert_eq!(ja, jb);
    assert_eq!(ja["claim"], a.claim.as_str());
    assert_eq!(
        fs::read_to_string(pa.with_extension("csv")).unwrap(),
        "m,mean_dev,q90_dev\n"
    );

    let other = run_scenario(&ExperimentConfig { seed: Some(2), ..cfg }).unwrap();
    assert_ne!(a.reports[0].deviations, other.reports[0].deviations);
}

#[test]
fn worker_count_does_not_change_results() {
    let cfg = ExperimentConfig {
        n: Some(12),
        m_sweep: Some(vec![64, 256]),
        ..quick("deviation-scaling", 30)
    };
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_scenario(&cfg).unwrap())
    };
    let one = run(1);
    let three = run(3);
    assert_eq!(one.curve, three.curve);
    for (x, y) in one.reports.iter().zip(&three.reports) {
        assert_eq!(x.deviations, y.deviations);
    }
    let csv = curve_csv(&one.curve);
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn empty_sweep_gives_header_only_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig {
        m_sweep: Some(vec![]),
        ..quick("deviation-scaling", 2)
    };
    let r = run_scenario(&cfg).unwrap();
    assert!(!r.passed);
    let p = dir.path().join("sub").join("sweep.json");
    let written = emit_report(&r, &p).unwrap();
    assert_eq!(written.len(), 2);
    assert_eq!(fs::read_to_string(p.with_extension("csv")).unwrap(), "m,mean_dev,q90_dev\n");
}

#[test]
fn audit_table_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let r = run_scenario(&quick("ssp-audit", 5)).unwrap();
    assert!(r.passed);
    let p = dir.path().join("audit.json");
    emit_report(&r, &p).unwrap();
    let table = fs::read_to_string(dir.path().join("audit_table.csv")).unwrap();
    assert!(table.starts_with("family,grid,g,vc,traces,bound,rate_bits,holds\n"));
    assert_eq!(table.lines().count(), 1 + 7 + 5);
}

#[test]
fn config_errors() {
    assert!(matches!(
        ExperimentConfig::from_json(r#"{"scenario": "kl-bounds", "bogus": 1}"#),
        Err(Error::Json(_))
    ));
    let cfg = ExperimentConfig::from_json(r#"{"scenario": "kl-bounds", "seed": 4}"#).unwrap();
    assert_eq!(cfg.seed(), 4);
    assert!(matches!(
        run_scenario(&ExperimentConfig::for_scenario("nope")),
        Err(Error::UnknownScenario(_))
    ));
    assert!(matches!(
        run_scenario(&quick("kl-bounds", 0)),
        Err(Error::InvalidConfig(_))
    ));
    let bad_eps = ExperimentConfig {
        eps: Some(1.5),
        ..ExperimentConfig::for_scenario("perm-product-success")
    };
    assert!(matches!(run_scenario(&bad_eps), Err(Error::InvalidConfig(_))));
    assert!(matches!(
        calibrate_constants(&ExperimentConfig::for_scenario("kl-bounds")),
        Err(Error::MethodInapplicable(_))
    ));
}

#[test]
fn easy_target_calibrates_to_smallest_constant() {
    let cfg = ExperimentConfig {
        n: Some(10),
        eps: Some(0.9),
        delta: Some(0.9),
        calibration_trials: Some(10),
        ..ExperimentConfig::for_scenario("perm-product-success")
    };
    let cal = calibrate_constants(&cfg).unwrap();
    assert_eq!(cal.chosen, Some(0.25));
    assert!(cal.monotone);
    assert_eq!(cal.passed.len(), 5);
}

#[test]
fn product_success_calibrates_on_default_grid() {
    let cfg = ExperimentConfig {
        calibration_trials: Some(30),
        trials: Some(30),
        ..ExperimentConfig::for_scenario("perm-product-success")
    };
    let r = run_scenario(&cfg).unwrap();
    let cal = r.calibration.as_ref().unwrap();
    assert!(cal.chosen.is_some());
    assert_eq!(r.params["c"], serde_json::json!(cal.chosen.unwrap()));
    assert!(r.passed, "{}", r.assertion);
}

#[test]
fn impossible_target_is_unbounded() {
    // A grid this sparse cannot hit the heavy cells of the mixture.
    let cfg = ExperimentConfig {
        n: Some(8),
        m: Some(16),
        calibration_grid: Some(vec![1e-9, 2e-9]),
        calibration_trials: Some(20),
        trials: Some(20),
        ..ExperimentConfig::for_scenario("grid-hitting")
    };
    let r = run_scenario(&cfg).unwrap();
    let cal = r.calibration.as_ref().unwrap();
    assert_eq!(cal.chosen, None);
    assert_eq!(cal.value(), 2e-9);
    assert!(r.assertion.contains("unbounded"));
}
