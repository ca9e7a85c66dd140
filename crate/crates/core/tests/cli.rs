use std::path::Path;
use std::process::{Command, Output};

fn linerecon(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_linerecon")).args(args).output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = linerecon(&["reconstruct", "--no-such-flag", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = linerecon(&["detect", "-i", "x", "-o", "y", "--epsilon", "-1"]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn staged_run_matches_one_shot() {
    let dir = tempfile::tempdir().unwrap();
    let cloud = dir.path().join("cube.json");
    let planes = dir.path().join("planes.json");
    let staged = dir.path().join("staged.off");
    let direct = dir.path().join("direct.off");
    let cfg = ["--epsilon", "0.06", "--epsilon-fus", "0.18", "--exhaustive", "true"];

    assert!(linerecon(&["synth", "cube", "--seed", "3", "-o", s(&cloud)]).status.success());
    let mut detect = vec!["detect", "-i", s(&cloud), "-o", s(&planes)];
    detect.extend(cfg);
    assert!(linerecon(&detect).status.success());
    let mut a = vec!["reconstruct", "-i", s(&cloud), "--planes", s(&planes), "-o", s(&staged)];
    a.extend(cfg);
    let mut b = vec!["reconstruct", "-i", s(&cloud), "-o", s(&direct)];
    b.extend(cfg);
    let (oa, ob) = (linerecon(&a), linerecon(&b));
    assert!(oa.status.success() && ob.status.success(), "{}", String::from_utf8_lossy(&oa.stderr));
    assert_eq!(std::fs::read(&staged).unwrap(), std::fs::read(&direct).unwrap());
}

#[test]
fn failed_runs_leave_no_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cloud = dir.path().join("cube.json");
    let mesh = dir.path().join("cube.off");
    assert!(linerecon(&["synth", "cube", "-o", s(&cloud)]).status.success());
    let report = dir.path().join("missing-dir").join("report.json");
    let out = linerecon(&["reconstruct", "-i", s(&cloud), "-o", s(&mesh), "--report", s(&report)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error ["));
    assert!(!mesh.exists());

    let out = linerecon(&["detect", "-i", s(&dir.path().join("absent.json")), "-o", s(&mesh)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!mesh.exists());
}
