use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use minball::scene_io::{parse_solution, SolutionDoc};
use minball::solver::Classification;

fn minball(args: &[&dyn AsRef<std::ffi::OsStr>]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_minball"))
        .args(args.iter().map(|a| a.as_ref()))
        .output()
        .expect("binary runs")
}

fn examples(dir: &Path) {
    let out = minball(&[&"examples", &dir]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

fn read_solution(path: &Path) -> SolutionDoc {
    parse_solution(&fs::read(path).unwrap()).unwrap()
}

#[test]
fn examples_writes_four_scenes() {
    let dir = tempfile::tempdir().unwrap();
    examples(dir.path());
    for stem in ["ex26", "ex27", "ex34", "ex35"] {
        let text = fs::read(dir.path().join(format!("{stem}.json"))).unwrap();
        minball::scene_io::parse_scene(&text).unwrap();
    }
}

#[test]
fn solve_square_two_points_with_probe() {
    let dir = tempfile::tempdir().unwrap();
    examples(dir.path());
    let sol = dir.path().join("sol.json");
    let svg = dir.path().join("fig.svg");
    let out = minball(&[
        &"solve",
        &dir.path().join("ex27.json"),
        &"--probe-uniqueness",
        &"-o",
        &sol,
        &"--svg",
        &svg,
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = read_solution(&sol);
    assert!((doc.radius - 1.0).abs() < 1e-6);
    assert_eq!(doc.uniqueness.unwrap().classification, Classification::NonUnique);
    assert!(fs::read_to_string(&svg).unwrap().contains(r#"class="ball""#));
}

#[test]
fn solve_prints_to_stdout_without_output_flag() {
    let dir = tempfile::tempdir().unwrap();
    examples(dir.path());
    let out = minball(&[&"solve", &dir.path().join("ex34.json"), &"--starts", &"4"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = parse_solution(&out.stdout).unwrap();
    assert_eq!(doc.starts.len(), 4);
}

#[test]
fn same_seed_gives_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    examples(dir.path());
    let scene = dir.path().join("ex35.json");
    let run = |name: &str, seed: &str| {
        let path = dir.path().join(name);
        let out = minball(&[&"solve", &scene, &"--seed", &seed, &"--starts", &"8", &"-o", &path]);
        assert_eq!(out.status.code(), Some(0));
        fs::read(path).unwrap()
    };
    let a = run("a.json", "11");
    let b = run("b.json", "11");
    let c = run("c.json", "12");
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn verify_accepts_solution_and_rejects_shrunk_radius() {
    let dir = tempfile::tempdir().unwrap();
    examples(dir.path());
    let scene = dir.path().join("ex34.json");
    let sol = dir.path().join("sol.json");
    assert_eq!(minball(&[&"solve", &scene, &"-o", &sol]).status.code(), Some(0));
    assert_eq!(minball(&[&"verify", &scene, &sol]).status.code(), Some(0));

    let text = fs::read_to_string(&sol).unwrap();
    let mut value: serde_json::Value = serde_json::from_str(&text).unwrap();
    let r = value["radius"].as_f64().unwrap();
    for shrink in [0.1, 0.05] {
        value["radius"] = serde_json::json!(r - shrink);
        let tampered = dir.path().join("tampered.json");
        fs::write(&tampered, value.to_string()).unwrap();
        let out = minball(&[&"verify", &scene, &tampered]);
        assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
        assert!(String::from_utf8_lossy(&out.stderr).contains("certification failed"));
    }
}

#[test]
fn oracle_agrees_on_halfplanes() {
    let dir = tempfile::tempdir().unwrap();
    examples(dir.path());
    let out = minball(&[&"oracle", &dir.path().join("ex34.json")]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    let line = stdout.lines().find(|l| l.starts_with("discrepancy")).unwrap();
    let value: f64 = line.split_whitespace().nth(1).unwrap().parse().unwrap();
    assert!(value <= 1e-3, "{stdout}");
}

#[test]
fn oracle_flags_a_wrong_solution() {
    let dir = tempfile::tempdir().unwrap();
    examples(dir.path());
    let scene = dir.path().join("ex34.json");
    let sol = dir.path().join("sol.json");
    assert_eq!(minball(&[&"solve", &scene, &"-o", &sol]).status.code(), Some(0));
    let mut value: serde_json::Value = serde_json::from_str(&fs::read_to_string(&sol).unwrap()).unwrap();
    value["radius"] = serde_json::json!(1.5);
    fs::write(&sol, value.to_string()).unwrap();
    assert_eq!(minball(&[&"oracle", &scene, &"--solution", &sol]).status.code(), Some(2));
}

#[test]
fn render_writes_svg() {
    let dir = tempfile::tempdir().unwrap();
    examples(dir.path());
    let scene = dir.path().join("ex35.json");
    let sol = dir.path().join("sol.json");
    let svg = dir.path().join("out.svg");
    assert_eq!(minball(&[&"solve", &scene, &"--starts", &"4", &"-o", &sol]).status.code(), Some(0));
    assert_eq!(minball(&[&"render", &scene, &sol, &"-o", &svg]).status.code(), Some(0));
    let text = fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<?xml"));
    assert!(text.contains("<polygon class=\"ball\""));
}

#[test]
fn errors_exit_with_one_and_name_the_cause() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.json");
    let out = minball(&[&"solve", &missing]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.json"));

    let bad = dir.path().join("bad.json");
    fs::write(
        &bad,
        r#"{"dimension": 2, "problem": "seb", "gauge": {"kind": "euclidean"},
            "constraint": {"kind": "whole_space"},
            "targets": [{"kind": "halfspace", "normal": [0, 1], "offset": 0}]}"#,
    )
    .unwrap();
    let out = minball(&[&"solve", &bad]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unbounded"));

    assert_eq!(minball(&[&"frobnicate"]).status.code(), Some(1));
    assert_eq!(minball(&[&"--help"]).status.code(), Some(0));
}

#[test]
fn verify_rejects_mismatched_dimension() {
    let dir = tempfile::tempdir().unwrap();
    examples(dir.path());
    let sol = dir.path().join("sol.json");
    let scene = dir.path().join("ex34.json");
    assert_eq!(minball(&[&"solve", &scene, &"-o", &sol]).status.code(), Some(0));
    let mut value: serde_json::Value = serde_json::from_str(&fs::read_to_string(&sol).unwrap()).unwrap();
    value["center"] = serde_json::json!([0.0, 0.0, 0.0]);
    fs::write(&sol, value.to_string()).unwrap();
    assert_eq!(minball(&[&"verify", &scene, &sol]).status.code(), Some(1));
}
