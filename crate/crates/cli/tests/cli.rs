use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_condlab"))
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin()
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "invalid JSON ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn schema(name: &str) -> jsonschema::Validator {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("schemas")
        .join(format!("{name}.schema.json"));
    let value: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    jsonschema::validator_for(&value).unwrap()
}

fn assert_valid(name: &str, report: &Value) {
    let envelope = schema("envelope");
    assert!(envelope.is_valid(report), "envelope invalid: {report}");
    let payload = &report["payload"];
    let errors: Vec<String> = schema(name)
        .iter_errors(payload)
        .map(|e| e.to_string())
        .collect();
    assert!(
        errors.is_empty(),
        "{name} payload invalid: {errors:?}\n{payload}"
    );
}

struct Fixture {
    dir: TempDir,
}

impl Fixture {
    fn new() -> Self {
        let dir = TempDir::new().unwrap();
        let files = [
            ("diag12.csv", "1,0\n0,2\n"),
            ("singular.csv", "1,1\n1,1\n"),
            ("a3.csv", "2,1,0\n0.5,3,-1\n1,0,1.5\n"),
            ("b3.csv", "1\n-2\n0.5\n"),
            ("lower.csv", "1,0\n2,1\n"),
            ("b2.csv", "1,1\n"),
            ("upper.csv", "1,3\n0,1\n"),
            ("ragged.csv", "1,2\n3\n"),
            (
                "a3.mtx",
                "%%MatrixMarket matrix array real general\n3 3\n2\n0.5\n1\n1\n3\n0\n0\n-1\n1.5\n",
            ),
        ];
        for (name, text) in files {
            fs::write(dir.path().join(name), text).unwrap();
        }
        Self { dir }
    }

    fn run(&self, args: &[&str]) -> Output {
        run(self.dir.path(), args)
    }
}

#[test]
fn kappa_of_diagonal() {
    let f = Fixture::new();
    let out = f.run(&["kappa", "--matrix", "diag12.csv", "--r", "2", "--s", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json_of(&out);
    assert_eq!(report["command"], "kappa");
    assert_eq!(report["payload"], serde_json::json!({ "kappa": 2.0 }));
    assert_eq!(report["inputs"]["dims"], serde_json::json!([2, 2]));
    assert_valid("kappa", &report);
}

#[test]
fn distance_of_diagonal() {
    let f = Fixture::new();
    let out = f.run(&["dist", "--matrix", "diag12.csv", "--r", "2", "--s", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json_of(&out);
    assert_eq!(
        report["payload"],
        serde_json::json!({ "distance": 1.0, "check_kappa_identity": true })
    );
    assert_valid("dist", &report);
}

#[test]
fn frobenius_experiment_matches() {
    let f = Fixture::new();
    let out = f.run(&[
        "experiment",
        "frob-inv",
        "--n",
        "2",
        "--trials",
        "200000",
        "--seed",
        "42",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report = json_of(&out);
    let size = &report["payload"]["perSize"][0];
    let mean = size["sampleMean"].as_f64().unwrap();
    let se = size["sampleStdError"].as_f64().unwrap();
    assert!((mean - 3.0).abs() <= 4.0 * se);
    assert_eq!(report["payload"]["verdict"], "matches");
    assert_valid("experiment", &report);
}

#[test]
fn every_subcommand_validates() {
    let f = Fixture::new();
    let cases: Vec<(&str, Vec<&str>)> = vec![
        (
            "norm",
            vec!["norm", "--matrix", "a3.csv", "--r", "inf", "--s", "2"],
        ),
        (
            "norm",
            vec!["norm", "--matrix", "a3.mtx", "--r", "1", "--s", "1"],
        ),
        (
            "kappa",
            vec!["kappa", "--matrix", "a3.csv", "--r", "1", "--s", "inf"],
        ),
        (
            "cond",
            vec!["cond", "--kind", "inversion", "--matrix", "a3.csv"],
        ),
        (
            "cond",
            vec![
                "cond", "--kind", "mat-vec", "--matrix", "a3.csv", "--vector", "b3.csv",
            ],
        ),
        (
            "cond",
            vec![
                "cond",
                "--kind",
                "solve-both",
                "--matrix",
                "a3.csv",
                "--vector",
                "b3.csv",
                "--r",
                "1",
            ],
        ),
        (
            "mixed",
            vec!["mixed", "--matrix", "a3.csv", "--vector", "b3.csv"],
        ),
        (
            "dist",
            vec!["dist", "--matrix", "a3.csv", "--r", "2", "--s", "1"],
        ),
        (
            "nearest-singular",
            vec![
                "nearest-singular",
                "--matrix",
                "a3.csv",
                "--r",
                "inf",
                "--s",
                "inf",
            ],
        ),
        (
            "estimate",
            vec![
                "estimate",
                "--kind",
                "solve-fixed-a",
                "--matrix",
                "a3.csv",
                "--vector",
                "b3.csv",
                "--samples",
                "50",
                "--seed",
                "3",
            ],
        ),
        (
            "solve-tri",
            vec!["solve-tri", "--matrix", "lower.csv", "--vector", "b2.csv"],
        ),
        (
            "verify-tri",
            vec![
                "verify-tri",
                "--matrix",
                "lower.csv",
                "--vector",
                "b2.csv",
                "--precision",
                "reduced",
            ],
        ),
        (
            "experiment",
            vec![
                "experiment",
                "frob-inv",
                "--n",
                "2,3",
                "--trials",
                "200",
                "--columns",
            ],
        ),
        (
            "experiment",
            vec!["experiment", "kappa-sq", "--n", "3", "--trials", "200"],
        ),
        (
            "experiment",
            vec!["experiment", "log-kappa", "--n", "5", "--trials", "200"],
        ),
        (
            "experiment",
            vec!["experiment", "ql", "--n", "4,8", "--trials", "200"],
        ),
    ];
    for (name, args) in cases {
        let out = f.run(&args);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        let report = json_of(&out);
        assert_eq!(
            report["command"]
                .as_str()
                .unwrap()
                .split(' ')
                .next()
                .unwrap(),
            args[0]
        );
        assert_valid(name, &report);
    }
}

#[test]
fn solve_tri_example() {
    let f = Fixture::new();
    let report = json_of(&f.run(&["solve-tri", "--matrix", "lower.csv", "--vector", "b2.csv"]));
    assert_eq!(
        report["payload"]["solution"],
        serde_json::json!([1.0, -1.0])
    );
    let out = f.run(&[
        "solve-tri",
        "--matrix",
        "lower.csv",
        "--vector",
        "b2.csv",
        "--format",
        "csv",
    ]);
    assert_eq!(String::from_utf8_lossy(&out.stdout), "1.0\n-1.0\n");
}

#[test]
fn exit_codes() {
    let f = Fixture::new();
    assert_eq!(
        f.run(&["kappa", "--matrix", "singular.csv"]).status.code(),
        Some(2)
    );
    assert_eq!(
        f.run(&["dist", "--matrix", "singular.csv"]).status.code(),
        Some(2)
    );
    assert_eq!(
        f.run(&["kappa", "--matrix", "ragged.csv"]).status.code(),
        Some(1)
    );
    assert_eq!(
        f.run(&["kappa", "--matrix", "missing.csv"]).status.code(),
        Some(1)
    );
    assert_eq!(
        f.run(&["kappa", "--matrix", "a3.csv", "--r", "3"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(f.run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(
        f.run(&["solve-tri", "--matrix", "upper.csv", "--vector", "b2.csv"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        f.run(&[
            "norm",
            "--matrix",
            "a3.csv",
            "--r",
            "inf",
            "--s",
            "1",
            "--max-enum-dim",
            "2"
        ])
        .status
        .code(),
        Some(4)
    );
    assert_eq!(
        f.run(&["cond", "--kind", "mat-vec", "--matrix", "a3.csv"])
            .status
            .code(),
        Some(1)
    );
    let out = f.run(&["kappa", "--matrix", "singular.csv"]);
    assert!(out.stdout.is_empty());
    assert!(!out.stderr.is_empty());
    assert_eq!(f.run(&["--help"]).status.code(), Some(0));
}

#[test]
fn verify_tri_rejects_overflowing_solves() {
    // x_1 = 1e60 does not fit in binary32.
    let f = Fixture::new();
    fs::write(f.dir.path().join("tiny.csv"), "1e-30,0\n1,1e-30\n").unwrap();
    fs::write(f.dir.path().join("big.csv"), "1e30,1\n").unwrap();
    let out = f.run(&[
        "verify-tri",
        "--matrix",
        "tiny.csv",
        "--vector",
        "big.csv",
        "--precision",
        "reduced",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("overflows"));
    let out = f.run(&["verify-tri", "--matrix", "tiny.csv", "--vector", "big.csv"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn violated_experiment_exits_three() {
    // ln kappa - ln n jumps from 0 at n = 1 to about 1 at n = 2.
    let f = Fixture::new();
    let out = f.run(&[
        "experiment",
        "ql",
        "--n",
        "1,2",
        "--trials",
        "2000",
        "--seed",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(3));
    let report = json_of(&out);
    assert_eq!(report["payload"]["verdict"], "violates");
    assert_valid("experiment", &report);
}

#[test]
fn csv_matrix_output_round_trips() {
    let f = Fixture::new();
    let out = f.run(&[
        "nearest-singular",
        "--matrix",
        "a3.csv",
        "--r",
        "2",
        "--s",
        "2",
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    fs::write(f.dir.path().join("e.csv"), &out.stdout).unwrap();
    let json = json_of(&f.run(&[
        "nearest-singular",
        "--matrix",
        "a3.csv",
        "--r",
        "2",
        "--s",
        "2",
    ]));
    let rows = json["payload"]["perturbation"].as_array().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    for (line, row) in text.lines().zip(rows) {
        for (cell, v) in line.split(',').zip(row.as_array().unwrap()) {
            assert_eq!(
                cell.parse::<f64>().unwrap().to_bits(),
                v.as_f64().unwrap().to_bits()
            );
        }
    }
    // Re-ingesting the written matrix reproduces it exactly.
    let again = f.run(&["nearest-singular", "--matrix", "e.csv", "--format", "csv"]);
    assert_eq!(again.status.code(), Some(2), "E itself is singular");
    let norm = json_of(&f.run(&["norm", "--matrix", "e.csv"]));
    let expected = json["payload"]["norm"].as_f64().unwrap();
    assert!((norm["payload"]["value"].as_f64().unwrap() - expected).abs() <= 1e-15 * expected);
}

#[test]
fn payloads_are_deterministic() {
    let f = Fixture::new();
    let args = [
        "estimate",
        "--kind",
        "inversion",
        "--matrix",
        "a3.csv",
        "--samples",
        "100",
        "--seed",
        "11",
    ];
    let a = f.run(&args);
    let b = bin()
        .current_dir(f.dir.path())
        .env("THREADS", "1")
        .args(args)
        .output()
        .unwrap();
    assert_eq!(a.stdout, b.stdout);
    let exp = [
        "experiment",
        "ql",
        "--n",
        "4,6",
        "--trials",
        "300",
        "--seed",
        "5",
        "--format",
        "csv",
    ];
    let a = f.run(&exp);
    let b = bin()
        .current_dir(f.dir.path())
        .env("THREADS", "2")
        .args(exp)
        .output()
        .unwrap();
    assert_eq!(a.stdout, b.stdout);
    assert!(String::from_utf8(a.stdout)
        .unwrap()
        .starts_with("n,trials,sampleMean"));
}

#[test]
fn bad_thread_override_is_malformed_input() {
    let f = Fixture::new();
    let out = bin()
        .current_dir(f.dir.path())
        .env("THREADS", "lots")
        .args(["kappa", "--matrix", "diag12.csv"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}
