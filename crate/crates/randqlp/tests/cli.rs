use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use randqlp::cli::read_matrix;
use randqlp::io::{binary, mtx};
use randqlp_core::{jacobi_svd, DenseMatrix};

fn randqlp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_randqlp"))
        .args(args)
        .env_remove("RANDQLP_SPEC")
        .env_remove("RANDQLP_INPUT")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = randqlp(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn csv_column(path: &Path, col: usize) -> Vec<f64> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|rec| rec.unwrap()[col].parse().unwrap()).collect()
}

#[test]
fn gen_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fd");
    ok(&["gen", "--spec", r#"{"kind":"fast-decay","n":100}"#, "--seed", "4", "--out", s(&out)]);
    for f in ["matrix.bin", "sigma.csv", "spec.json"] {
        assert!(out.join(f).is_file(), "{f}");
    }
    let a = binary::read_matrix(&out.join("matrix.bin"), mtx::DEFAULT_MEM_CAP).unwrap();
    assert_eq!(a.shape(), (100, 100));
    let sigma = csv_column(&out.join("sigma.csv"), 1);
    let got = jacobi_svd(&a).unwrap().sigma;
    for (i, (g, t)) in got.iter().zip(&sigma).enumerate() {
        assert!((g - t).abs() <= 1e-10 * t, "i={i}: {g} vs {t}");
    }
}

#[test]
fn gen_refuses_to_overwrite() {
    let dir = tempfile::tempdir().unwrap();
    let spec = r#"{"kind":"linear","n":5,"params":[2,1]}"#;
    let out = s(dir.path());
    ok(&["gen", "--spec", spec, "--out", out]);
    let again = randqlp(&["gen", "--spec", spec, "--out", out]);
    assert_eq!(again.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&again.stderr).contains("matrix.bin"));
    ok(&["gen", "--spec", spec, "--out", out, "--force"]);
}

#[test]
fn gen_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let spec_path = dir.path().join("spec.json");
    fs::write(&spec_path, r#"{"kind":"noisy-low-rank","n":300,"k":60}"#).unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        ok(&["gen", "--spec", s(&spec_path), "--seed", "1", "--out", s(out)]);
    }
    for f in ["matrix.bin", "sigma.csv", "spec.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn decompose_identity() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("eye.bin");
    binary::write_matrix(&input, &DenseMatrix::identity(50)).unwrap();
    let out = dir.path().join("out");
    ok(&["decompose", "--input", s(&input), "--out", s(&out)]);

    let report: serde_json::Value = serde_json::from_slice(&fs::read(out.join("report.json")).unwrap()).unwrap();
    let runs = report["runs"].as_array().unwrap();
    assert_eq!(runs.len(), 4);
    for run in runs {
        assert!(run["residual"].as_f64().unwrap() <= 1e-12, "{run}");
    }
    for col in 1..=4 {
        for d in csv_column(&out.join("diag.csv"), col) {
            assert!((d.abs() - 1.0).abs() <= 1e-12, "column {col}: {d}");
        }
    }
    assert!(out.join("sv_compare.csv").is_file());
    let l = binary::read_matrix(&out.join("randqlp-l.bin"), mtx::DEFAULT_MEM_CAP).unwrap();
    assert_eq!(l.shape(), (50, 50));
}

#[test]
fn unknown_algorithm_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let r = randqlp(&[
        "decompose",
        "--spec",
        r#"{"kind":"fast-decay","n":10}"#,
        "--algs",
        "randqlp,lu",
        "--out",
        s(dir.path()),
    ]);
    assert_eq!(r.status.code(), Some(2));
}

#[test]
fn both_or_neither_input_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let neither = randqlp(&["decompose", "--out", s(dir.path())]);
    assert_eq!(neither.status.code(), Some(2));
    let both = randqlp(&["decompose", "--spec", "{}", "--input", "x.bin", "--out", s(dir.path())]);
    assert_eq!(both.status.code(), Some(2));
}

#[test]
fn decompose_diag_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let spec = r#"{"kind":"s-shaped","n":80}"#;
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        ok(&["decompose", "--spec", spec, "--algs", "randqlp", "--seed", "9", "--out", s(out)]);
    }
    assert_eq!(fs::read(a.join("diag.csv")).unwrap(), fs::read(b.join("diag.csv")).unwrap());
    assert_eq!(fs::read(a.join("randqlp-l.bin")).unwrap(), fs::read(b.join("randqlp-l.bin")).unwrap());
}

#[test]
fn decompose_error_curves() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    ok(&[
        "decompose",
        "--spec",
        r#"{"kind":"fast-decay","n":60}"#,
        "--algs",
        "randqlp,pqlp",
        "--ks",
        "5,20,60",
        "--out",
        s(out),
    ]);
    let frob = csv_column(&out.join("curve-randqlp.csv"), 1);
    let opt = csv_column(&out.join("curve-randqlp.csv"), 2);
    assert_eq!(frob.len(), 3);
    assert!(frob.windows(2).all(|w| w[1] <= w[0]));
    for (f, o) in frob.iter().zip(&opt) {
        assert!(f >= &(o * (1.0 - 1e-12)));
    }
    assert!(out.join("curve-pqlp.csv").is_file());
    let bad =
        randqlp(&["decompose", "--spec", r#"{"kind":"fast-decay","n":6}"#, "--ks", "7", "--out", s(out), "--force"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn bounds_rejects_k_outside_range() {
    let dir = tempfile::tempdir().unwrap();
    for k in ["0", "20", "25"] {
        let r = randqlp(&["bounds", "--spec", r#"{"kind":"fast-decay","n":20}"#, "--k", k, "--out", s(dir.path())]);
        assert_eq!(r.status.code(), Some(2), "k={k}");
    }
}

#[test]
fn bounds_on_exact_rank_input() {
    let dir = tempfile::tempdir().unwrap();
    let spec = r#"{"kind":"custom","n":12,"params":[5,4,3,2,0,0,0,0,0,0,0,0]}"#;
    ok(&["bounds", "--spec", spec, "--k", "4", "--seeds", "0..=2", "--threads", "2", "--out", s(dir.path())]);
    let summary: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["seeds"], 3);
    assert_eq!(summary["violations_proved"], 0);
    assert!(summary["failed_seeds"].as_array().unwrap().is_empty());
    for seed in 0..=2 {
        let rep: serde_json::Value =
            serde_json::from_slice(&fs::read(dir.path().join(format!("bounds-seed-{seed}.json"))).unwrap()).unwrap();
        assert!(rep["report"]["l22_measured"].as_f64().unwrap() <= 1e-12);
        let m = &rep["report"]["angle_measured"];
        assert!(m["theta_q"].as_f64().unwrap() <= 1e-8);
        assert!(m["theta_p"].as_f64().unwrap() <= 1e-8);
    }
}

#[test]
fn bounds_reports_per_seed_errors_without_aborting() {
    let dir = tempfile::tempdir().unwrap();
    // σ_k = 0: every seed fails, the sweep still completes.
    let spec = r#"{"kind":"custom","n":6,"params":[1,1,0,0,0,0]}"#;
    ok(&["bounds", "--spec", spec, "--k", "3", "--seeds", "1,2", "--out", s(dir.path())]);
    let summary: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["failed_seeds"], serde_json::json!([1, 2]));
}

#[test]
fn bench_single_size_one_row_per_alg() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["bench", "--sizes", "40", "--repeats", "1", "--algs", "randqlp,pqlp,cpqr,svd", "--out", s(dir.path())]);
    let mut r = csv::Reader::from_path(dir.path().join("bench.csv")).unwrap();
    assert_eq!(r.headers().unwrap(), vec!["n", "alg", "seconds", "flops_model"]);
    let rows: Vec<csv::StringRecord> = r.records().map(Result::unwrap).collect();
    let algs: Vec<&str> = rows.iter().map(|r| &r[1]).collect();
    assert_eq!(algs, ["randqlp", "pqlp", "cpqr", "svd"]);
    assert_eq!(&rows[0][3], "700800");
    assert_eq!(&rows[1][3], "");
}

#[test]
fn matrix_market_input() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.mtx");
    fs::write(&path, "%%MatrixMarket matrix coordinate real general\n% small\n3 2 3\n1 1 2.0\n2 2 3\n3 1 -1\n")
        .unwrap();
    let a = read_matrix(&path, mtx::DEFAULT_MEM_CAP).unwrap();
    assert_eq!(a, DenseMatrix::from_row_major(3, 2, &[2.0, 0.0, 0.0, 3.0, -1.0, 0.0]).unwrap());
    let out = dir.path().join("out");
    ok(&["decompose", "--input", s(&path), "--algs", "randqlp,cpqr", "--out", s(&out)]);

    let big = dir.path().join("big.mtx");
    fs::write(&big, "%%MatrixMarket matrix coordinate real general\n100000 100000 0\n").unwrap();
    let r = randqlp(&["decompose", "--input", s(&big), "--out", s(&out), "--force"]);
    assert_eq!(r.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&r.stderr).contains("cap"), "{}", String::from_utf8_lossy(&r.stderr));

    let broken = dir.path().join("broken.mtx");
    fs::write(&broken, "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 x 1\n").unwrap();
    let r = randqlp(&["decompose", "--input", s(&broken), "--out", s(&out), "--force"]);
    assert_eq!(r.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&r.stderr).contains("broken.mtx:3:"));
}

#[test]
fn gen_directory_is_accepted_as_input() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g");
    ok(&["gen", "--spec", r#"{"kind":"fast-decay","n":30}"#, "--out", s(&g)]);
    ok(&["decompose", "--input", s(&g), "--algs", "pqlp", "--out", s(&dir.path().join("d"))]);
}
