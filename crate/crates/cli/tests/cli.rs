use std::path::Path;
use std::process::{Command, Output};

use arbocube::{build_ball, Ball, BallLimits, Complex, Family};
use serde_json::Value;

fn arbocube(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_arbocube"))
        .args(args)
        .env_remove("ARBOCUBE_BUDGET")
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

const SMALL_D24: &[&str] = &["ball", "--family", "D", "--n", "2", "--m", "4", "--height-max", "2", "--depth", "1"];

#[test]
fn ball_writes_json_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let mut args = SMALL_D24.to_vec();
        args.extend(["-o", p.to_str().unwrap()]);
        let o = arbocube(&args);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let v = read_json(&a);
    assert_eq!(v["meta"]["tool"], "arbocube");
    assert_eq!(v["family"], "D");
    assert!(!v["vertices"].as_array().unwrap().is_empty());
    // stdout gives the same document
    let o = arbocube(SMALL_D24);
    assert_eq!(json(&o), v);
}

#[test]
fn ball_dot_output() {
    let mut args = SMALL_D24.to_vec();
    args.extend(["--format", "dot"]);
    let o = arbocube(&args);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("digraph ball {"));
}

#[test]
fn invalid_parameters_exit_2() {
    let o = arbocube(&["ball", "--family", "C", "--n", "2", "--m", "0"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("m must be ≥ 1"), "{}", stderr(&o));
    let o = arbocube(&["ball", "--family", "X", "--n", "2", "--m", "2"]);
    assert_eq!(code(&o), 2);
    let o = arbocube(&["collapse", "--n", "2", "--m", "4", "--depth", "0"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn resource_guard_exits_3() {
    let o = Command::new(env!("CARGO_BIN_EXE_arbocube"))
        .args(SMALL_D24)
        .env("ARBOCUBE_BUDGET", "10")
        .output()
        .unwrap();
    assert_eq!(code(&o), 3, "{}", stderr(&o));
}

#[test]
fn check_on_a_real_ball() {
    let dir = tempfile::tempdir().unwrap();
    let ball = dir.path().join("d24.json");
    let mut args = SMALL_D24.to_vec();
    args.extend(["-o", ball.to_str().unwrap()]);
    assert_eq!(code(&arbocube(&args)), 0);
    let o = arbocube(&["check", "--ball", ball.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&o);
    let checks = v["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 6);
    for c in checks {
        assert_ne!(c["status"], "fail", "{}", c["name"]);
    }
    assert_eq!(v["verdict"]["expected_cat0"], true);
    // every vertex of this small ball touches the boundary, so the link check
    // has nothing to decide and --strict reports it
    let flag = checks.iter().find(|c| c["name"] == "flaglinks").unwrap();
    assert_eq!(flag["status"], "unknown");
    let o = arbocube(&["check", "--ball", ball.to_str().unwrap(), "--strict"]);
    assert_eq!(code(&o), 5);
    let o = arbocube(&["check", "--ball", ball.to_str().unwrap(), "--checks", "squares,k32", "--strict"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["checks"].as_array().unwrap().len(), 2);
}

#[test]
fn unknown_check_name_exits_2() {
    let o = arbocube(&["check", "--ball", "nowhere.json", "--checks", "bogus"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("bogus"));
}

#[test]
fn missing_ball_file_exits_2() {
    let o = arbocube(&["check", "--ball", "/nonexistent/ball.json"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn planted_k32_fails_the_check() {
    let cx = Complex::new(Family::D, 2, 4).unwrap();
    let real = build_ball(&cx, BallLimits::new(2, 1, 1, 3), 100_000).unwrap();
    let fixture = Ball::from_parts(
        cx,
        real.limits,
        real.vertices[..5].to_vec(),
        vec![(0, 2), (0, 3), (0, 4), (1, 2), (1, 3), (1, 4)],
        vec![],
    );
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("k32.json");
    std::fs::write(&p, serde_json::to_string(&fixture.to_json()).unwrap()).unwrap();
    let o = arbocube(&["check", "--ball", p.to_str().unwrap(), "--checks", "k32"]);
    assert_eq!(code(&o), 4, "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v["checks"][0]["status"], "fail");
    assert_eq!(v["checks"][0]["items"].as_array().unwrap().len(), 1);
}

#[test]
fn witness_commands() {
    let o = arbocube(&["witness", "--n", "2", "--m", "4"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v["verified"], true);
    assert_eq!(v["vertices"].as_array().unwrap().len(), 7);
    assert_eq!(v["squares"].as_array().unwrap().len(), 3);
    assert_eq!(v["search_derived"], false);

    let o = arbocube(&["witness", "--n", "2", "--m", "3"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("is CAT(0)"));

    let o = arbocube(&["witness", "--n", "3", "--m", "6"]);
    assert_eq!(code(&o), 0);

    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("w.json");
    let o = arbocube(&["witness", "--n", "1", "--m", "3", "-o", p.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert_eq!(read_json(&p)["search_derived"], true);
}

#[test]
fn verdict_commands() {
    let v = json(&arbocube(&["verdict", "--family", "C", "--n", "2", "--m", "4"]));
    assert_eq!(v["expected_cat0"], false);
    assert_eq!(v["selector"], "D(2,3)");
    assert_eq!(v["evidence"]["witness"]["verified"], true);
    let v = json(&arbocube(&["verdict", "--family", "c", "--n", "1", "--m", "1"]));
    assert_eq!(v["expected_cat0"], true);
    let v = json(&arbocube(&["verdict", "--family", "D", "--n", "1", "--m", "5"]));
    assert_eq!(v["expected_cat0"], true);
    let v = json(&arbocube(&["verdict", "--family", "D", "--n", "2", "--m", "1"]));
    assert_eq!(v["evidence"]["note"], "empirical only for this parameter pair");
    let o = arbocube(&[
        "verdict", "--family", "D", "--n", "2", "--m", "4", "--with-ball", "--height-max", "2", "--depth", "1",
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["evidence"]["checks"].as_array().unwrap().len(), 6);
}

#[test]
fn collapse_commands() {
    let v = json(&arbocube(&["collapse", "--n", "2", "--m", "4", "--depth", "5"]));
    assert_eq!(v["target"], "sharp(2,5)");
    assert_eq!(v["isomorphism"], true);
    assert_eq!(v["merged_arcs"], 5);
    let v = json(&arbocube(&["collapse", "--n", "1", "--m", "2", "--depth", "3"]));
    assert_eq!(v["target"], "sharp(1,2)");
    assert_eq!(v["source"], "star(1,2)");
}

#[test]
fn jobs_flag_is_accepted() {
    let o = arbocube(&["--jobs", "1", "verdict", "--family", "D", "--n", "2", "--m", "2"]);
    assert_eq!(code(&o), 0);
    let o = arbocube(&["--jobs", "0", "verdict", "--family", "D", "--n", "2", "--m", "2"]);
    assert_eq!(code(&o), 2);
}
