use std::path::PathBuf;
use std::process::{Command, Output};
use std::sync::Arc;

use descent_engine::descent::ChiStatus;
use descent_engine::fincat::FinCategory;
use descent_engine::presheaf::{canonical_shape, Presheaf, PresheafMorphism, ShapeJson};
use descent_engine::scenarios::{builtin_names, Scenario, Verdict};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_descent-engine"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let path = std::env::temp_dir().join(format!("descent-engine-cli-{}-{name}", std::process::id()));
    std::fs::write(&path, contents).expect("temp file");
    path
}

/// Canonical shape of two points over one point.
fn two_points() -> ShapeJson {
    let cat = Arc::new(FinCategory::new(vec!["*".into()], vec![(0, 0)], vec![0], vec![(0, 0, 0)]).unwrap());
    let cover = Arc::new(Presheaf::new(cat.clone(), vec![2], vec![vec![0, 1]]).unwrap());
    let base = Arc::new(Presheaf::terminal(cat));
    let a = PresheafMorphism::to_terminal(cover);
    assert_eq!(a.target.total_size(), base.total_size());
    canonical_shape(&a).unwrap().to_json()
}

fn verdict(o: &Output) -> Verdict {
    serde_json::from_str(&stdout(o)).expect("verdict json")
}

#[test]
fn run_identity_passes() {
    let o = cli(&["run", "identity"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = verdict(&o);
    assert_eq!(v.scenario, "identity");
    assert!(v.passed());
}

#[test]
fn run_mackey_passes_with_iso_exchange() {
    let o = cli(&["run", "mackey-s3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = verdict(&o);
    assert_eq!(v.chi_status, ChiStatus::Iso);
    assert!(v.law("double-coset-count").unwrap().checked > 0);
}

#[test]
fn validate_accepts_canonical_shape() {
    let path = scratch("valid.json", &serde_json::to_string(&two_points()).unwrap());
    let o = cli(&["validate", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "valid");
}

#[test]
fn validate_names_the_broken_equation() {
    let mut shape = two_points();
    std::mem::swap(&mut shape.p2, &mut shape.p3);
    let path = scratch("broken.json", &serde_json::to_string(&shape).unwrap());
    let o = cli(&["validate", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("a2 p1 = a2 p2"), "{}", stderr(&o));
}

#[test]
fn missing_inputs_are_input_errors() {
    let o = cli(&["validate", "/nonexistent/shape.json"]);
    assert_eq!(o.status.code(), Some(2));
    let o = cli(&["run", "no-such-builtin"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("identity"), "{}", stderr(&o));
    let o = cli(&["run", "identity", "--coeff", "vect-4"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn list_builtins_names_every_scenario() {
    let o = cli(&["list-builtins"]);
    assert_eq!(o.status.code(), Some(0));
    let listed: Vec<String> = stdout(&o).lines().map(|l| l.split('\t').next().unwrap().to_string()).collect();
    assert_eq!(listed, builtin_names());
}

#[test]
fn report_renders_saved_verdicts() {
    let run = cli(&["run", "epi-only"]);
    assert_eq!(run.status.code(), Some(0), "{}", stderr(&run));
    let path = scratch("verdict.json", &stdout(&run));
    let text = cli(&["report", path.to_str().unwrap(), "--format", "text"]);
    assert_eq!(text.status.code(), Some(0));
    assert!(stdout(&text).contains("all laws pass"));
    assert!(stdout(&text).contains("chevalley"));
    let json = cli(&["report", path.to_str().unwrap(), "--format", "json"]);
    assert_eq!(stdout(&json), stdout(&run));
}

#[test]
fn flags_override_scenario_fields() {
    let o = cli(&["run", "identity", "--coeff", "vect-5", "--seed", "7", "--budget", "5000"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let env = verdict(&o).environment;
    assert_eq!((env.coeff.as_str(), env.seed, env.budget), ("vect-5", 7, 5000));
}

#[test]
fn bare_shape_files_run() {
    let path = scratch("bare.json", &serde_json::to_string(&two_points()).unwrap());
    let o = cli(&["run", path.to_str().unwrap(), "--format", "text"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn failing_law_exits_one() {
    let mut s = Scenario::builtin("epi-only").unwrap();
    s.expect.exchange = Some(ChiStatus::Iso);
    let path = scratch("wrong-expectation.json", &serde_json::to_string(&s).unwrap());
    let o = cli(&["run", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let v = verdict(&o);
    assert!(!v.law("exchange").unwrap().pass);
}
