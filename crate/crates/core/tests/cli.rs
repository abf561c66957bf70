use std::path::Path;
use std::process::{Command, Output};

fn steinis(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_steinis"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn ok(out: &Output) {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn sample_correct_ksd_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    ok(&steinis(
        &[
            "sample", "--dim", "3", "-n", "200", "--seed", "4", "-o", "s.csv",
        ],
        p,
    ));
    let csv = std::fs::read_to_string(p.join("s.csv")).unwrap();
    assert_eq!(csv.lines().count(), 201);
    ok(&steinis(
        &["correct", "s.csv", "--dim", "3", "-o", "w.json"],
        p,
    ));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(p.join("w.json")).unwrap()).unwrap();
    let w: Vec<f64> = serde_json::from_value(json["weights"].clone()).unwrap();
    assert_eq!(w.len(), 200);
    assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);

    let weighted = steinis(&["ksd", "s.csv", "--dim", "3", "--weights", "w.json"], p);
    ok(&weighted);
    let uniform = steinis(&["ksd", "s.csv", "--dim", "3"], p);
    ok(&uniform);
    let parse = |o: &Output| {
        String::from_utf8_lossy(&o.stdout)
            .trim()
            .parse::<f64>()
            .unwrap()
    };
    let (kw, ku) = (parse(&weighted), parse(&uniform));
    assert!((kw - json["ksd"].as_f64().unwrap()).abs() < 1e-12);
    assert!((ku - json["uniform_ksd"].as_f64().unwrap()).abs() < 1e-12);
    assert!(kw <= ku);
}

#[test]
fn logistic_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    ok(&steinis(
        &[
            "gen-data", "--n-data", "50", "--dim", "3", "--seed", "1", "-o", "d.csv",
        ],
        p,
    ));
    ok(&steinis(
        &[
            "sample",
            "--target",
            "logistic",
            "--dataset",
            "d.csv",
            "--chain",
            "tula-subsampled",
            "--n-s",
            "10",
            "--h",
            "0.1",
            "-n",
            "60",
            "-o",
            "s.csv",
        ],
        p,
    ));
    ok(&steinis(
        &[
            "correct",
            "s.csv",
            "--target",
            "logistic",
            "--dataset",
            "d.csv",
            "--variant",
            "subsampled",
            "--n-k",
            "10",
        ],
        p,
    ));
}

#[test]
fn experiment_writes_results_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    std::fs::write(
        p.join("c.toml"),
        "experiment = \"gaussian20d\"\nladder = [8, 16, 32]\nseeds = [1, 2]\ndim = 3\noutput = \"out\"\n\
         [chain]\nkind = \"tula\"\nh = 1.0\ngamma = 0.05\n\
         [[kernels]]\nid = \"imq\"\nbase = { family = \"imq\", alpha = 1.0, beta = 0.5 }\n",
    )
    .unwrap();
    ok(&steinis(&["experiment", "c.toml"], p));
    let csv = std::fs::read_to_string(p.join("out/results.csv")).unwrap();
    // 3 ladder points x 4 methods x 2 seeds
    assert_eq!(csv.lines().count(), 1 + 24);
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(p.join("out/manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["rows"], 24);
    let hash = manifest["config_hash"].as_str().unwrap();
    assert!(csv.lines().skip(1).all(|l| l.contains(hash)));
}

#[test]
fn config_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    std::fs::write(
        p.join("bad.toml"),
        "experiment = \"gaussian20d\"\nseeds = []\nbogus = 1\n",
    )
    .unwrap();
    assert_eq!(
        steinis(&["experiment", "bad.toml", "--out", "o"], p)
            .status
            .code(),
        Some(2)
    );
    std::fs::write(
        p.join("ladder.toml"),
        "experiment = \"gaussian20d\"\nladder = [16, 8]\nseeds = [1]\n[chain]\nkind = \"tula\"\nh = 1.0\n\
         [[kernels]]\nid = \"g\"\nbase = { family = \"gaussian\" }\n",
    )
    .unwrap();
    let out = steinis(&["experiment", "ladder.toml", "--out", "o"], p);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ladder"));
    assert_eq!(
        steinis(&["correct", "missing.csv"], p).status.code(),
        Some(2)
    );
    assert_eq!(steinis(&["sample", "--dim", "0"], p).status.code(), Some(2));
}

#[test]
fn malformed_samples_report_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    std::fs::write(p.join("s.csv"), "x1,x2\n0.1,0.2\n0.3,oops\n").unwrap();
    let out = steinis(&["ksd", "s.csv"], p);
    assert_eq!(out.status.code(), Some(2));
    assert!(
        String::from_utf8_lossy(&out.stderr).contains("line 3"),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn non_finite_samples_exit_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    // a point so far out that the Gaussian score overflows the kernel arithmetic
    std::fs::write(p.join("s.csv"), "1e200,0\n0,1\n").unwrap();
    let out = steinis(&["ksd", "s.csv"], p);
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}
