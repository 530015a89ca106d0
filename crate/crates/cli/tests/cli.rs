use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use pmp_core::io::{read_trajectory_csv, InstanceFile};

fn pmp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pmp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

const GENERIC_2D: &str = r#"{
  "d": 2, "n": 2,
  "obstacles": [[0.0, 0.0], [1.0, 0.0]],
  "start": [[0.3, 0.5], [0.7, -0.4]],
  "goal": [[1.5, 0.2], [-0.4, 0.9]]
}"#;

#[test]
fn plan_writes_csv_and_prints_region() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "generic.json", GENERIC_2D);
    let output = dir.path().join("traj.csv");
    let out = pmp(&["plan", &input, "--samples", "101", "-o", output.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out).trim(), "i=4 j=4 ell=8");

    let (header, rows) = read_trajectory_csv(&fs::read_to_string(&output).unwrap()).unwrap();
    assert_eq!(header[0], "t");
    assert_eq!(header.len(), 1 + 4 * 2);
    assert_eq!(rows.len(), 101);

    let q = InstanceFile::from_json(GENERIC_2D).unwrap().to_query().unwrap();
    let first = &rows[0][1..];
    let last = &rows[100][1..];
    for (a, b) in first.iter().zip(q.start().coords()).chain(last.iter().zip(q.goal().coords())) {
        assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0));
    }
    // Obstacle columns are constant down the file.
    for row in &rows {
        assert_eq!(&row[1..5], &rows[0][1..5]);
    }
}

#[test]
fn plan_json_format() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "generic.json", GENERIC_2D);
    let output = dir.path().join("traj.json");
    let out = pmp(&["plan", &input, "--samples", "10", "--format", "json", "-o", output.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(&output).unwrap()).unwrap();
    assert_eq!(doc["rows"].as_array().unwrap().len(), 10);
    assert_eq!(doc["region"]["ell"], 8);
    assert_eq!(doc["columns"][5], "x1_0");
}

#[test]
fn validation_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let odd = write(
        dir.path(),
        "odd.json",
        r#"{"d": 3, "n": 1, "obstacles": [[0,0,0],[1,0,0]], "start": [[2,0,0]], "goal": [[3,0,0]]}"#,
    );
    let out = pmp(&["plan", &odd, "-o", dir.path().join("x.csv").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("OddDimension"));

    let mismatch = write(
        dir.path(),
        "mismatch.json",
        r#"{"d": 2, "n": 1, "obstacles": [[0,0],[1,0]], "goal_obstacles": [[0,0],[1,0.000001]],
            "start": [[2,0]], "goal": [[3,0]]}"#,
    );
    let out = pmp(&["plan", &mismatch, "-o", dir.path().join("y.csv").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("ObstacleMismatch"));

    let colliding = write(
        dir.path(),
        "collide.json",
        r#"{"d": 2, "n": 1, "obstacles": [[0,0],[1,0]], "start": [[0,0]], "goal": [[3,0]]}"#,
    );
    let out = pmp(&["classify", &colliding]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("CollidingPoints"));

    let degenerate = write(
        dir.path(),
        "degenerate.json",
        r#"{"d": 2, "n": 1, "obstacles": [[0,0],[0,0]], "start": [[1,0]], "goal": [[3,0]]}"#,
    );
    let out = pmp(&["classify", &degenerate]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("CollidingPoints") || stderr(&out).contains("DegenerateObstacles"));
}

#[test]
fn classify_examples() {
    let dir = tempfile::tempdir().unwrap();
    let colinear = write(
        dir.path(),
        "colinear.json",
        r#"{"d": 2, "n": 2, "obstacles": [[0,0],[1,0]], "start": [[2,0],[-1,0]], "goal": [[0.5,0],[3,0]]}"#,
    );
    let out = pmp(&["classify", &colinear]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "i=4 j=4 ell=8");

    let low = write(
        dir.path(),
        "low.json",
        r#"{"d": 2, "n": 1, "obstacles": [[0,0],[1,0]], "start": [[0,5]], "goal": [[2,0]]}"#,
    );
    let out = pmp(&["classify", &low]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "i=2 j=3 ell=5");

    let broken = write(dir.path(), "broken.json", "{ not json");
    assert_eq!(pmp(&["classify", &broken]).status.code(), Some(2));
    assert_eq!(pmp(&["classify", "/nonexistent/file.json"]).status.code(), Some(2));
}

#[test]
fn verify_passes_on_seeded_instances() {
    let out = pmp(&["verify", "--n", "2", "--d", "2", "--seed", "7", "--count", "500"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let text = stdout(&out);
    let sep: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("min separation: "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(sep > 0.0);
    assert!(text.contains("result: PASS"));
}

#[test]
fn verify_census_and_json() {
    let out = pmp(&["verify", "--n", "1", "--d", "2", "--count", "20", "--samples", "100", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["attainable_regions"], 3);
    assert_eq!(doc["expected_regions"], 3);
    assert_eq!(doc["passed"], true);
}

#[test]
fn verify_rejects_bad_flags() {
    let out = pmp(&["verify", "--n", "2", "--d", "5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("OddDimension"));
    assert_eq!(pmp(&["verify", "--n", "two", "--d", "2"]).status.code(), Some(2));
}

#[test]
fn random_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let res = pmp(&["random", "--n", "3", "--d", "4", "--seed", "5", "--count", "6", out.to_str().unwrap()]);
        assert!(res.status.success(), "{}", stderr(&res));
    }
    let mut names: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 6);
    for name in names {
        assert_eq!(fs::read(a.join(&name)).unwrap(), fs::read(b.join(&name)).unwrap());
    }
}

#[test]
fn random_edge_cases() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty");
    let out = pmp(&["random", "--n", "2", "--d", "2", "--count", "0", empty.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(fs::read_dir(&empty).unwrap().count(), 0);

    let out = pmp(&[
        "random", "--n", "10", "--d", "2", "--count", "1", "--min-sep", "0.9",
        dir.path().join("full").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("GenerationBudgetExceeded"));
}

#[test]
fn random_then_plan_round_trips_endpoints() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("inst");
    let out = pmp(&["random", "--n", "3", "--d", "2", "--seed", "3", "--count", "4", inst.to_str().unwrap()]);
    assert!(out.status.success());
    for entry in fs::read_dir(&inst).unwrap() {
        let path = entry.unwrap().path();
        let traj = dir.path().join("t.csv");
        let out = pmp(&["plan", path.to_str().unwrap(), "--samples", "50", "-o", traj.to_str().unwrap()]);
        assert!(out.status.success(), "{}", stderr(&out));
        let q = InstanceFile::from_json(&fs::read_to_string(&path).unwrap()).unwrap().to_query().unwrap();
        let (_, rows) = read_trajectory_csv(&fs::read_to_string(&traj).unwrap()).unwrap();
        assert_eq!(&rows[0][1..], q.start().coords());
        assert_eq!(&rows[49][1..], q.goal().coords());
    }
}
