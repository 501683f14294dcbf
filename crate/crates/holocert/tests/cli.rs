use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use holocert::{list_builtins, run_scenario, write_outputs, CliError, Overrides, Task, SCHEMA};

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn holocert(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_holocert")).args(args).output().unwrap()
}

fn run_file(name: &str, out: &Path, extra: &[&str]) -> Output {
    let path = scenario(name);
    let mut args = vec!["run", path.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    holocert(&args)
}

fn report(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn clifford_certificate_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_file("clifford-certify.json", dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(dir.path());
    assert_eq!(r["schema"], SCHEMA);
    assert_eq!(r["result"]["kind"], "certificate");
    assert!(r["result"]["max_modulus"].as_f64().unwrap() < 1e-6);
    let csv = std::fs::read_to_string(dir.path().join("certificate.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 16);
}

#[test]
fn unbalanced_orbit_is_obstructed_by_t12() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_file("orbit-obstructed.json", dir.path(), &[]);
    assert_eq!(out.status.code(), Some(3));
    let r = report(dir.path());
    assert_eq!(r["verdict"]["passed"], false);
    assert_eq!(r["result"]["verdict"]["witness"], "T12");
}

#[test]
fn missing_resolution_names_the_field() {
    let text = r#"{"schema": "holocert/1", "task": "certify",
        "model": {"name": "CPn-t1", "dim": 2}, "submanifold": {"family": "clifford-torus"}}"#;
    match run_scenario(text, &Overrides::default()) {
        Err(CliError::Validation { field, .. }) => assert_eq!(field, "submanifold.resolution"),
        other => panic!("{other:?}"),
    }
    // An override supplies it.
    let o = Overrides { resolution: Some(16), tolerance: None };
    assert!(run_scenario(text, &o).unwrap().report.verdict.passed);
}

#[test]
fn validation_and_parse_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"schema": "holocert/1", "task": "certify", "modle": {}}"#).unwrap();
    let out = holocert(&["run", bad.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("modle"));

    let out = run_file("clifford-certify.json", dir.path(), &["--resolution", "48"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("submanifold.resolution"));

    let out = run_file("clifford-certify.json", dir.path(), &["--tolerance", "-1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_fields_and_schema_are_rejected() {
    let unknown = r#"{"schema": "holocert/1", "task": "probe", "model": {"name": "CPn-t1", "dim": 2, "scale": 3}}"#;
    match run_scenario(unknown, &Overrides::default()) {
        Err(CliError::Parse { path, .. }) => assert_eq!(path, "model.scale"),
        other => panic!("{other:?}"),
    }
    let old = r#"{"schema": "holocert/0", "task": "moment-check", "model": {"name": "CPn-t1", "dim": 1}}"#;
    assert!(matches!(run_scenario(old, &Overrides::default()), Err(CliError::Validation { field, .. }) if field == "schema"));
    let model = r#"{"schema": "holocert/1", "task": "moment-check", "model": {"name": "CP2", "dim": 2}}"#;
    assert!(matches!(run_scenario(model, &Overrides::default()), Err(CliError::Validation { field, .. }) if field == "model.name"));
    let expr = r#"{"schema": "holocert/1", "task": "moment-check", "model": {"name": "flat-Cn", "dim": 2},
        "fields": [{"label": "v", "components": ["z1", "z3"]}]}"#;
    assert!(
        matches!(run_scenario(expr, &Overrides::default()), Err(CliError::Validation { field, .. }) if field == "fields[0].components[1]")
    );
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for name in ["perturbed-probe.json", "optimize-defect.json"] {
        run_file(name, a.path(), &[]);
        run_file(name, b.path(), &[]);
        for file in ["report.json", "probe.csv", "trace.csv"] {
            let (x, y) = (a.path().join(file), b.path().join(file));
            if x.exists() {
                assert_eq!(std::fs::read(&x).unwrap(), std::fs::read(&y).unwrap(), "{name} {file}");
            }
        }
    }
    assert!(!std::fs::read_to_string(a.path().join("report.json")).unwrap().contains("seconds"));
}

#[test]
fn every_example_scenario_runs() {
    let expected = [
        ("clifford-certify.json", 0),
        ("clifford-stokes.json", 0),
        ("extend-clifford.json", 0),
        ("moment-cp2.json", 0),
        ("optimize-defect.json", 0),
        // The orbit volume has no interior minimum; descent runs into the floor.
        ("optimize-volume.json", 3),
        ("orbit-obstructed.json", 3),
        ("perturbed-probe.json", 0),
    ];
    let mut tasks = Vec::new();
    for (name, code) in expected {
        let text = std::fs::read_to_string(scenario(name)).unwrap();
        let outcome = run_scenario(&text, &Overrides::default()).unwrap();
        assert_eq!(outcome.exit_code(), code, "{name}: {}", outcome.report.verdict.summary);
        let dir = tempfile::tempdir().unwrap();
        let written = write_outputs(&outcome, dir.path()).unwrap();
        assert_eq!(written.len(), 2 + outcome.tables.len());
        for t in &outcome.tables {
            let mut r = csv::Reader::from_path(dir.path().join(t.file_name())).unwrap();
            assert_eq!(r.headers().unwrap().len(), t.header.len());
            assert_eq!(r.records().count(), t.rows.len());
        }
        tasks.push(outcome.report.scenario.task);
    }
    for task in Task::ALL {
        assert!(tasks.contains(&task), "{}", task.name());
    }
}

#[test]
fn list_prints_the_catalog() {
    let out = holocert(&["list"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text, list_builtins());
    assert!(text.contains(&format!("schema {SCHEMA}")));
    for name in ["flat-Cn", "CPn-t1", "orbit-torus", "clifford-torus", "torus", "moment-check", "optimize-defect"] {
        assert!(text.contains(name), "{name}");
    }
}

#[test]
fn missing_config_file_is_an_internal_error() {
    let out = holocert(&["run", "/nonexistent/scenario.json"]);
    assert_eq!(out.status.code(), Some(4));
}
