use std::fs;
use std::process::{Command, Output};

use brownsphere::mating::DistanceMatrix;
use brownsphere::snake::ContourPair;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_brownsphere")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn sample_snake_writes_a_loadable_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("s.json");
    let o = run(&["sample-snake", "--n", "1024", "--seed", "7", "--snake-out", p.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let h = ContourPair::load(&p).unwrap();
    assert_eq!((h.n, h.seed), (1024, 7));
    let again = run(&["sample-snake", "--n", "1024", "--seed", "7"]);
    assert_eq!(String::from_utf8(again.stdout).unwrap().trim(), fs::read_to_string(&p).unwrap());

    let d = run(&["tree-dist", "--snake-in", p.to_str().unwrap(), "--s", "0", "--t", "1024"]);
    assert_eq!(String::from_utf8(d.stdout).unwrap().trim(), "0");
}

#[test]
fn exit_codes() {
    assert_eq!(code(&run(&["no-such-command"])), 1);
    assert_eq!(code(&run(&["sample-snake", "--n", "7"])), 1);
    assert_eq!(code(&run(&["tree-dist", "--snake-in", "/nonexistent.json", "--s", "0", "--t", "1"])), 2);
    assert_eq!(code(&run(&["--help"])), 0);
    let bad = Command::new(env!("CARGO_BIN_EXE_brownsphere")).args(["cvs-enumerate", "--n", "1"]).env("CVS_THREADS", "zero").output().unwrap();
    assert_eq!(code(&bad), 1);
}

#[test]
fn cvs_enumerate_matches_closed_forms() {
    let o = Command::new(env!("CARGO_BIN_EXE_brownsphere")).args(["cvs-enumerate", "--n", "3"]).env("CVS_THREADS", "1").output().unwrap();
    assert_eq!(code(&o), 0);
    let out = String::from_utf8(o.stdout).unwrap();
    let rows: Vec<&str> = out.lines().skip(1).collect();
    assert_eq!(rows, ["1,3,3,2,6,6,true", "2,18,18,9,36,36,true", "3,135,135,54,270,270,true"]);
}

#[test]
fn cvs_forward_and_inverse_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let tree = dir.path().join("t.json");
    let map = dir.path().join("q.json");
    fs::write(&tree, "[0, [[1, [[0, []]]], [-1, []]]]").unwrap();
    assert_eq!(code(&run(&["cvs-forward", "--tree-in", tree.to_str().unwrap(), "--sign", "-1", "--out", map.to_str().unwrap()])), 0);
    let o = run(&["cvs-inverse", "--map-in", map.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["sign"], -1);
    assert_eq!(v["tree"], serde_json::json!([0, [[1, [[0, []]]], [-1, []]]]));
}

#[test]
fn build_sphere_then_invert() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("d.bin");
    let o = run(&["build-sphere", "--n", "2048", "--seed", "3", "-m", "200", "--out", m.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let d = DistanceMatrix::load(&m).unwrap();
    assert!((200..=202).contains(&d.m()));
    let marks = format!("{}.marks.json", m.display());
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&marks).unwrap()).unwrap();
    assert!(v["epsilon"] == 1 || v["epsilon"] == -1);

    let out = dir.path().join("r.json");
    let o = run(&["invert", "--sphere-in", m.to_str().unwrap(), "--marks-in", &marks, "--epsilon", "-1", "--out", out.to_str().unwrap()]);
    match code(&o) {
        0 => {
            let rec = ContourPair::load(&out).unwrap();
            assert_eq!(rec.n + 1, d.m() + 1);
        }
        // The inverse may find the sample too sparse; that is a check failure.
        3 => assert!(String::from_utf8_lossy(&o.stderr).contains("sampling density")),
        c => panic!("exit {c}: {}", String::from_utf8_lossy(&o.stderr)),
    }

    let csv = dir.path().join("d.csv");
    let o = run(&["build-sphere", "--n", "256", "-m", "16", "--out", csv.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(code(&o), 0);
    assert!(fs::read_to_string(&csv).unwrap().starts_with("point,"));
}

#[test]
fn quadvar_prints_a_table() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("p.csv");
    let values: Vec<String> = (0..=1000).map(|k| (k as f64 / 1000.0).to_string()).collect();
    fs::write(&p, values.join("\n")).unwrap();
    let o = run(&["quadvar", "--path-in", p.to_str().unwrap(), "--eps-schedule", "0.25,0.125"]);
    assert_eq!(code(&o), 0);
    let out = String::from_utf8(o.stdout).unwrap();
    assert!(out.contains("0.25,4,0.25"), "{out}");
    assert!(out.contains("0.125,8,0.125"), "{out}");
}

#[test]
fn stats_reports_are_reproducible() {
    let args = ["stats", "--runs", "200", "--n", "64", "--volume-n", "256", "--volume-runs", "2", "--seed", "5"];
    let (a, b) = (run(&args), run(&args));
    assert!([0, 3].contains(&code(&a)));
    let strip = |o: &Output| {
        let mut v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        v.as_object_mut().unwrap().remove("duration_ms");
        v
    };
    let (ra, rb) = (strip(&a), strip(&b));
    assert_eq!(ra, rb);
    let tests = ra["tests"].as_array().unwrap();
    assert_eq!(tests.len(), 4);
    assert_eq!(code(&a) == 0, tests.iter().all(|t| t["pass"] == true));
    assert_eq!(code(&run(&["stats", "--runs", "50"])), 1);
}
