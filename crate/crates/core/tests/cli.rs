mod common;

use std::fs;
use std::path::{Path, PathBuf};

use common::*;
use hyperspace_core::cli::run;
use hyperspace_core::io::{load_cloud, save_cloud, save_manifest};
use hyperspace_core::PointSet;
use serde_json::Value;
use tempfile::TempDir;

struct Outcome {
    code: i32,
    stdout: String,
    stderr: String,
}

impl Outcome {
    fn json(&self) -> Value {
        serde_json::from_str(&self.stdout).unwrap_or_else(|e| panic!("{e}: {}", self.stdout))
    }
}

fn hyperspace(args: &[&str]) -> Outcome {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("hyperspace").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    Outcome {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn harmonic_manifest(dir: &Path, n: usize) -> String {
    let sets: Vec<PointSet> = (1..=n).map(|i| cloud_1d(&[1.0 / i as f64])).collect();
    let path = dir.join("harmonic.json");
    save_manifest(&sets, &path, "h").unwrap();
    path.to_str().unwrap().to_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn dist_of_a_cloud_with_itself_is_zero() {
    let dir = TempDir::new().unwrap();
    let a = write(dir.path(), "a.csv", "x,y\n0,0\n1,0\n0,1\n");
    let o = hyperspace(&["dist", &a, &a]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let v = o.json();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["command"], "dist");
    assert_eq!(v["rho_h"], 0.0);
}

#[test]
fn dist_and_oracle_agree() {
    let dir = TempDir::new().unwrap();
    let a = write(dir.path(), "a.csv", "0,0\n3,0\n");
    let b = write(dir.path(), "b.csv", "0,1\n");
    for metric in ["euclidean", "manhattan", "chebyshev"] {
        let fast = hyperspace(&["dist", &a, &b, "--metric", metric]).json();
        let slow = hyperspace(&["dist", &a, &b, "--metric", metric, "--oracle"]).json();
        for key in ["u_ab", "u_ba", "rho_h", "witness_ab", "witness_ba"] {
            assert_eq!(fast[key], slow[key], "{metric} {key}");
        }
    }
    let v = hyperspace(&["dist", &a, &b]).json();
    assert_eq!(v["u_ab"], 10f64.sqrt());
    assert_eq!(v["u_ba"], 1.0);
    assert_eq!(v["witness_ab"], serde_json::json!([3.0, 0.0]));
}

#[test]
fn limit_of_the_harmonic_manifest_is_zero() {
    let dir = TempDir::new().unwrap();
    let m = harmonic_manifest(dir.path(), 200);
    let zero = write(dir.path(), "zero.csv", "0\n");
    let o = hyperspace(&["limit", &m, "--epsilon", "0.3", "--candidates", &zero]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let v = o.json();
    assert_eq!(v["limit"]["points"], serde_json::json!([[0.0]]));
    let trace = v["trace"].as_array().unwrap();
    assert_eq!(trace.len(), 200);
    assert_eq!(trace[3]["rho_h"], 0.25);

    let o = hyperspace(&["limit", &m, "--epsilon", "0.02", "--grid", "0.01"]);
    let points = o.json()["limit"]["points"].clone();
    assert_eq!(points.as_array().unwrap().len(), 1);
    assert!(points[0][0].as_f64().unwrap().abs() <= 0.02);
}

#[test]
fn lemma_on_the_harmonic_manifest() {
    let dir = TempDir::new().unwrap();
    let m = harmonic_manifest(dir.path(), 200);
    let zero = write(dir.path(), "zero.csv", "0\n");
    let o = hyperspace(&["lemma", &m, "--x", "1", "--epsilon", "1", "--m", "0", "--candidates", &zero, "--b", "2"]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let v = o.json();
    assert_eq!(v["verdict"]["holds"], true);
    assert_eq!(v["verdict"]["distance"], 1.0);
    let chain = &v["chain"];
    assert!(chain["points"].as_array().unwrap().len() >= 2);
    assert!(chain["estimate_distance"].as_f64().unwrap() < 3.0);
    assert_eq!(hyperspace(&["lemma", &m, "--x", "1", "--epsilon", "1", "--m", "0"]).json()["chain"], Value::Null);
}

#[test]
fn sequence_commands_report() {
    let dir = TempDir::new().unwrap();
    let m = harmonic_manifest(dir.path(), 50);
    let v = hyperspace(&["cauchy", &m, "--epsilon", "0.1"]).json();
    assert_eq!(v["is_cauchy"], true);
    assert_eq!(v["m_star"], 8);
    let zero = write(dir.path(), "zero.csv", "0\n");
    for cmd in ["liminf", "limsup"] {
        // N_check = 25 and 1/25 = 0.04
        let v = hyperspace(&[cmd, &m, "--epsilon", "0.05", "--candidates", &zero]).json();
        assert_eq!(v["command"], cmd);
        assert!(v["points"].as_array().unwrap().contains(&serde_json::json!([0.0])));
    }
    let v = hyperspace(&["agree", &m, "--epsilon", "0.05", "--candidates", &zero]).json();
    assert_eq!(v["agree"], true);
}

#[test]
fn ifs_writes_points_and_trace() {
    let dir = TempDir::new().unwrap();
    let seed = write(dir.path(), "seed.csv", "0\n1\n");
    let out = dir.path().join("points.csv");
    let trace = dir.path().join("trace.csv");
    let o = hyperspace(&[
        "ifs", "builtin:cantor", "--seed", &seed, "--iters", "5", "--budget", "1000",
        "--out", out.to_str().unwrap(), "--trace", trace.to_str().unwrap(),
    ]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    assert_eq!(o.json()["final_size"], 64);
    assert_eq!(load_cloud(&out).unwrap().len(), 64);
    let table = fs::read_to_string(&trace).unwrap();
    let mut lines = table.lines();
    assert_eq!(lines.next(), Some("step,size,gap,delta"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(&row[..2], &["0", "2"]);
    assert!((row[2].parse::<f64>().unwrap() - 1.0 / 3.0).abs() < 1e-15);
    assert_eq!(row[3], "0.0");
    assert_eq!(lines.count(), 4);

    let sys = write(dir.path(), "sys.json", r#"{"dim": 1, "maps": [{"linear": [0.5], "offset": [0.25]}]}"#);
    let o = hyperspace(&["ifs", &sys, "--seed", &seed, "--iters", "3", "--budget", "4"]);
    assert_eq!(o.code, 0, "{}", o.stderr);
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let a = write(dir.path(), "a.csv", "0\n");
    let gap = write(dir.path(), "gap.csv", "0\n\n1\n");
    let missing = dir.path().join("missing.csv");
    let missing = missing.to_str().unwrap();
    let m = harmonic_manifest(dir.path(), 20);

    assert_eq!(hyperspace(&["--help"]).code, 0);
    assert_eq!(hyperspace(&["bogus"]).code, 1);
    assert_eq!(hyperspace(&["dist", &a]).code, 1);
    assert_eq!(hyperspace(&["cauchy", &m, "--epsilon", "-1"]).code, 1);

    let o = hyperspace(&["dist", &a, missing]);
    assert_eq!(o.code, 2);
    assert!(o.stderr.starts_with("error: "));
    let o = hyperspace(&["dist", &a, &gap]);
    assert_eq!(o.code, 2);
    assert!(o.stderr.contains("line 2"), "{}", o.stderr);
    let two_d = write(dir.path(), "b.csv", "0,0\n");
    assert_eq!(hyperspace(&["dist", &a, &two_d]).code, 2);
    let bad = write(dir.path(), "bad.json", r#"{"dim": 1, "entries": [{"index": 2, "path": "h1.csv"}]}"#);
    assert_eq!(hyperspace(&["cauchy", &bad, "--epsilon", "1"]).code, 2);

    let o = hyperspace(&["lemma", &m, "--x", "1", "--epsilon", "0.5", "--m", "0"]);
    assert_eq!(o.code, 3);
    assert!(o.stderr.contains("index 2"), "{}", o.stderr);
    assert_eq!(o.stderr.lines().count(), 1);

    let sys = write(dir.path(), "grow.json", r#"{"dim": 1, "maps": [{"linear": [1.5], "offset": [0]}]}"#);
    assert_eq!(hyperspace(&["ifs", &sys, "--seed", &a, "--iters", "2", "--budget", "4"]).code, 3);
    let ragged = write(dir.path(), "ragged.json", r#"{"dim": 2, "maps": [{"linear": [1, 0, 0], "offset": [0, 0]}]}"#);
    assert_eq!(hyperspace(&["ifs", &ragged, "--seed", &two_d, "--iters", "2", "--budget", "4"]).code, 2);
}

fn repeated_runs_are_identical(args: &[&str]) {
    let first = hyperspace(args);
    assert_eq!(first.code, 0, "{args:?}: {}", first.stderr);
    for _ in 0..3 {
        assert_eq!(hyperspace(args).stdout, first.stdout, "{args:?}");
    }
}

#[test]
fn output_is_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let m = harmonic_manifest(dir.path(), 60);
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(9);
    let a: PathBuf = dir.path().join("ra.csv");
    let b: PathBuf = dir.path().join("rb.csv");
    save_cloud(&random_cloud(&mut rng, 2, 400, 1.0), &a).unwrap();
    save_cloud(&random_cloud(&mut rng, 2, 300, 1.0), &b).unwrap();
    let seed = write(dir.path(), "seed.csv", "0,0\n");
    let (a, b) = (a.to_str().unwrap(), b.to_str().unwrap());
    repeated_runs_are_identical(&["dist", a, b]);
    repeated_runs_are_identical(&["cauchy", &m, "--epsilon", "0.05"]);
    repeated_runs_are_identical(&["limit", &m, "--epsilon", "0.05", "--grid", "0.01"]);
    repeated_runs_are_identical(&["liminf", &m, "--epsilon", "0.05", "--grid", "0.01"]);
    repeated_runs_are_identical(&["limsup", &m, "--epsilon", "0.05", "--grid", "0.01"]);
    repeated_runs_are_identical(&["agree", &m, "--epsilon", "0.05", "--grid", "0.01"]);
    repeated_runs_are_identical(&["lemma", &m, "--x", "0.5", "--epsilon", "1", "--m", "0", "--chain"]);
    repeated_runs_are_identical(&["ifs", "builtin:sierpinski", "--seed", &seed, "--iters", "7", "--budget", "500"]);
}
