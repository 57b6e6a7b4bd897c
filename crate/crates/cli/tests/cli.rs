//! End-to-end runs of the `rqi` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rqi_bench::args::SolverKind;
use rqi_bench::run::{solve, trace_rows};
use rqi_core::instances::matrix::{build_matrix_eigen, LeftInverseChoice, Normalization};
use rqi_core::linalg::Mat;
use rqi_core::solver::SolverConfig;
use serde_json::Value;
use tempfile::TempDir;

fn rqi(args: &[&str], workers: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_rqi"));
    cmd.args(args);
    match workers {
        Some(w) => cmd.env("RQI_WORKERS", w),
        None => cmd.env_remove("RQI_WORKERS"),
    };
    cmd.output().expect("binary runs")
}

fn run_ok(args: &[&str]) -> String {
    let out = rqi(args, None);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Data lines of a CSV export: the header and rows, without the comment line.
fn csv_lines(path: &Path) -> Vec<String> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# generated"));
    lines.map(str::to_owned).collect()
}

fn csv_rows(path: &Path) -> Vec<csv::StringRecord> {
    let text = csv_lines(path).join("\n");
    csv::Reader::from_reader(text.as_bytes()).records().map(Result::unwrap).collect()
}

fn golden(name: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(format!("{name}.header"));
    fs::read_to_string(p).unwrap().trim_end().to_owned()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

const SMALL: &[(&str, &[&str])] = &[
    ("eig", &["--n", "6"]),
    ("tensor-real", &["--m", "3", "--n", "3"]),
    ("nlep", &["--n", "5", "--degree", "2"]),
    ("stiefel", &["--n", "5", "--p", "2"]),
    ("grassmann", &["--n", "6", "--p", "2"]),
    ("graph", &["--n", "3"]),
    ("tensor-complex", &["--m", "3", "--n", "2"]),
];

#[test]
fn csv_headers_match_golden_files() {
    let dir = TempDir::new().unwrap();
    for (cmd, extra) in SMALL {
        let out = dir.path().join(format!("{cmd}.csv"));
        let mut args = vec![*cmd, "--trials", "2", "--output", path_str(&out)];
        args.extend_from_slice(extra);
        run_ok(&args);
        assert_eq!(csv_lines(&out)[0], golden(cmd), "{cmd}");
    }
    let out = dir.path().join("counts.csv");
    run_ok(&["verify-counts", "--m", "3", "--n", "2", "--output", path_str(&out)]);
    assert_eq!(csv_lines(&out)[0], golden("verify-counts"));

    let trace = dir.path().join("trace.csv");
    run_ok(&["eig", "--n", "6", "--trials", "1", "--trace", path_str(&trace)]);
    assert_eq!(csv_lines(&trace)[0], golden("trace"));

    let pairs = dir.path().join("pairs.csv");
    run_ok(&["tensor-complex", "--m", "3", "--n", "2", "--trials", "1", "--pairs-output", path_str(&pairs)]);
    assert_eq!(csv_lines(&pairs)[0], golden("pairs"));
}

#[test]
fn solve_commands_share_one_schema() {
    let solve: Vec<String> = ["eig", "tensor-real", "nlep", "stiefel", "grassmann", "graph"].iter().map(|c| golden(c)).collect();
    assert!(solve.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn identical_seeds_give_identical_files() {
    let dir = TempDir::new().unwrap();
    for (cmd, extra) in SMALL {
        for format in ["csv", "json"] {
            let mut files = Vec::new();
            for (k, workers) in [None, Some("1"), Some("3")].into_iter().enumerate() {
                let out = dir.path().join(format!("{cmd}-{k}.{format}"));
                let mut args = vec![*cmd, "--trials", "4", "--seed", "9", "--format", format, "--output", path_str(&out)];
                args.extend_from_slice(extra);
                let o = rqi(&args, workers);
                assert!(o.status.success());
                let text = fs::read_to_string(&out).unwrap();
                let body: Vec<String> = text.lines().filter(|l| !l.contains("generated")).map(str::to_owned).collect();
                files.push(body);
            }
            assert!(files.windows(2).all(|w| w[0] == w[1]), "{cmd} {format}");
        }
    }
}

#[test]
fn different_seeds_differ() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    run_ok(&["eig", "--n", "8", "--trials", "3", "--seed", "1", "--output", path_str(&a)]);
    run_ok(&["eig", "--n", "8", "--trials", "3", "--seed", "2", "--output", path_str(&b)]);
    assert_ne!(csv_lines(&a), csv_lines(&b));
}

#[test]
fn exit_codes() {
    assert_eq!(rqi(&["eig", "--n", "4", "--trials", "2"], None).status.code(), Some(0));
    assert_eq!(rqi(&["eig", "--bogus"], None).status.code(), Some(2));
    assert_eq!(rqi(&["eig", "--n", "0"], None).status.code(), Some(2));
    assert_eq!(rqi(&["eig", "--solver", "gauss"], None).status.code(), Some(2));
    assert_eq!(rqi(&["eig", "--tol", "-1"], None).status.code(), Some(2));
    assert_eq!(rqi(&["grassmann", "--solver", "nr"], None).status.code(), Some(2));
    assert_eq!(rqi(&["nlep", "--sides", "two", "--solver", "chebyshev"], None).status.code(), Some(2));
    assert_eq!(rqi(&["stiefel", "--n", "2", "--p", "3"], None).status.code(), Some(2));
    assert_eq!(rqi(&["eig", "--trials", "2", "--trace", "t.csv"], None).status.code(), Some(2));
    assert_eq!(rqi(&["tensor-complex", "--m", "4", "--n", "8"], None).status.code(), Some(2));
    assert_eq!(rqi(&["tensor-complex", "--solver", "nr"], None).status.code(), Some(2));
    assert_eq!(rqi(&["verify-counts", "--m", "2"], None).status.code(), Some(2));
    assert_eq!(rqi(&["tensor-real", "--m", "2"], None).status.code(), Some(2));
    assert_eq!(rqi(&["eig"], Some("0")).status.code(), Some(2));
    assert_eq!(rqi(&["eig"], Some("many")).status.code(), Some(2));
    assert_eq!(rqi(&["--help"], None).status.code(), Some(0));
}

#[test]
fn exhausted_budget_fails_and_names_the_size() {
    let out = rqi(&["verify-counts", "--m", "4", "--n", "3", "--max-restarts", "2"], None);
    assert_eq!(out.status.code(), Some(1));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.lines().any(|l| l.starts_with("FAIL m=4 n=3")), "{stdout}");
}

#[test]
fn verify_counts_grid_reaches_every_count() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("grid.csv");
    run_ok(&["verify-counts", "--m-min", "3", "--m-max", "4", "--n-min", "2", "--n-max", "3", "--output", path_str(&out)]);
    let rows = csv_rows(&out);
    let got: Vec<(String, String, String)> = rows.iter().map(|r| (r[0].to_owned(), r[1].to_owned(), r[3].to_owned())).collect();
    let want = [("3", "2", "3"), ("3", "3", "7"), ("4", "2", "4"), ("4", "3", "13")];
    assert_eq!(got, want.map(|(a, b, c)| (a.to_owned(), b.to_owned(), c.to_owned())));
    assert!(rows.iter().all(|r| &r[7] == "pass" && r[4] == r[3]));
}

#[test]
fn verify_counts_single_sizes() {
    for (m, n, count) in [("5", "2", "5"), ("6", "3", "31")] {
        let stdout = run_ok(&["verify-counts", "--m", m, "--n", n]);
        assert!(stdout.contains(&format!("PASS m={m} n={n} trial=0 target={count} found={count}")), "{stdout}");
    }
}

#[test]
fn verify_counts_skips_sizes_above_budget() {
    let stdout = run_ok(&["verify-counts", "--m", "4", "--n", "8"]);
    assert!(stdout.contains("SKIPPED m=4 n=8"));
    assert!(stdout.contains("verify-counts: 0/0 reached"));
}

#[test]
fn tensor_complex_finds_three_pairs_in_every_trial() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("c.csv");
    run_ok(&["tensor-complex", "--m", "3", "--n", "2", "--trials", "20", "--seed", "1", "--output", path_str(&out)]);
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 20);
    assert!(rows.iter().all(|r| &r[3] == "3" && &r[9] == "true"));
}

#[test]
fn tensor_complex_order_four_dimension_four() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("c.json");
    let pairs = dir.path().join("p.json");
    run_ok(&[
        "tensor-complex",
        "--m",
        "4",
        "--n",
        "4",
        "--trials",
        "5",
        "--format",
        "json",
        "--output",
        path_str(&out),
        "--pairs-output",
        path_str(&pairs),
    ]);
    let doc = json(&out);
    assert_eq!(doc["summary"]["n_trys"], 5);
    assert_eq!(doc["summary"]["n_pairs"].as_f64(), Some(40.0));
    let recs = doc["records"].as_array().unwrap();
    assert_eq!(recs.len(), 5);
    for r in recs {
        assert_eq!(r["n_pairs"], 40);
        assert!(r["n_real_pairs"].as_u64().unwrap() <= 40);
        assert!(r["restarts_to_90"].as_u64().unwrap() <= r["restarts_to_all"].as_u64().unwrap());
    }
    let p = json(&pairs);
    let rows = p["records"].as_array().unwrap();
    assert_eq!(rows.len(), 5 * 40);
    for r in rows {
        assert_eq!(r["z_real"].as_array().unwrap().len(), 4);
        assert!(r["residual"].as_f64().unwrap() <= 1e-10);
        if r["is_real"].as_bool().unwrap() {
            // real up to a unit phase: real and imaginary parts are parallel
            let re: Vec<f64> = r["z_real"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
            let im: Vec<f64> = r["z_imag"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
            let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| p * q).sum::<f64>();
            assert!(dot(&re, &re) * dot(&im, &im) - dot(&re, &im).powi(2) < 1e-12);
        }
    }
}

#[test]
fn symmetric_eig_summary() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("e.json");
    let stdout =
        run_ok(&["eig", "--n", "20", "--solver", "rqi-schur", "--trials", "100", "--format", "json", "--output", path_str(&out)]);
    assert!(stdout.starts_with("eig solver=rqi-schur trials=100"));
    let s = &json(&out)["summary"];
    assert!(s["convergence_fraction"].as_f64().unwrap() >= 0.9);
    assert!(s["mean_order"].as_f64().unwrap() >= 2.5, "{s}");
}

#[test]
fn symmetric_trace_has_decreasing_tail() {
    let dir = TempDir::new().unwrap();
    let trace = dir.path().join("t.csv");
    run_ok(&["eig", "--n", "20", "--trials", "1", "--seed", "3", "--trace", path_str(&trace)]);
    let res: Vec<f64> = csv_rows(&trace).iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(res.len() >= 3);
    let tail = &res[res.len() - 3..];
    assert!(tail.windows(2).all(|w| w[1] < w[0]), "{res:?}");
    assert!(*res.last().unwrap() <= 1e-12);
}

#[test]
fn exact_start_traces_a_single_row() {
    let a = Mat::diagonal(&[1.0, 2.0, 5.0]);
    let (p, c) = build_matrix_eigen(a, Normalization::Sphere, LeftInverseChoice::Gram).unwrap();
    let r = solve(&p, &c, &[0.0, 1.0, 0.0], SolverKind::RqiSchur, &SolverConfig::default()).unwrap();
    let rows = trace_rows(&r);
    assert_eq!(rows.len(), 1);
    assert!(rows[0].residual <= 1e-12);
    assert_eq!(rows[0].lambda, vec![2.0]);
}

#[test]
fn nlep_trace_rows_track_iterations() {
    let dir = TempDir::new().unwrap();
    let trace = dir.path().join("t.json");
    let out = dir.path().join("o.json");
    for sides in ["one", "two"] {
        run_ok(&[
            "nlep",
            "--n",
            "8",
            "--degree",
            "3",
            "--sides",
            sides,
            "--trials",
            "1",
            "--format",
            "json",
            "--trace",
            path_str(&trace),
            "--output",
            path_str(&out),
        ]);
        let iterations = json(&out)["records"][0]["iterations"].as_u64().unwrap() as usize;
        let rows = json(&trace)["records"].as_array().unwrap().clone();
        assert_eq!(rows.len(), iterations + 1);
        assert_eq!(rows[0]["lambda"].as_array().unwrap().len(), 2);
        assert!(rows.last().unwrap()["step_norm"].is_null());
    }
}

#[test]
fn residual_and_wallclock_columns() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("w.csv");
    run_ok(&["eig", "--n", "6", "--trials", "2", "--residuals", "--wallclock", "--output", path_str(&out)]);
    let lines = csv_lines(&out);
    assert_eq!(lines[0], format!("{},wallclock_ms_nonnormative", golden("eig")));
    for r in csv_rows(&out) {
        let iterations: usize = r[2].parse().unwrap();
        assert_eq!(r[7].split(';').count(), iterations + 1);
        assert!(r[8].parse::<f64>().unwrap() >= 0.0);
    }
}

#[test]
fn tensor_file_input() {
    let dir = TempDir::new().unwrap();
    // diagonal order-3 tensor with weights 1, 2, 3
    let mut entries = vec!["0"; 27];
    entries[0] = "1";
    entries[13] = "2";
    entries[26] = "3";
    let cube = dir.path().join("c.json");
    fs::write(&cube, format!(r#"{{"order": 3, "dim": 3, "entries": [{}]}}"#, entries.join(","))).unwrap();
    let out = dir.path().join("o.json");
    run_ok(&["tensor-real", "--tensor-file", path_str(&cube), "--trials", "10", "--format", "json", "--output", path_str(&out)]);
    let recs = json(&out)["records"].as_array().unwrap().clone();
    assert!(recs.iter().filter(|r| r["converged"] == true).count() >= 8);
    for r in recs.iter().filter(|r| r["converged"] == true) {
        // eigenvalues of the diagonal cubic on the sphere: 1/sqrt(sum over a subset of 1/d_i^2)
        let l = r["lambda"][0].as_f64().unwrap().abs();
        let subsets = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 1.0, 0.0], [1.0, 0.0, 1.0], [0.0, 1.0, 1.0], [1.0, 1.0, 1.0]];
        let hit = subsets.iter().any(|s| {
            let w: f64 = s.iter().zip([1.0f64, 2.0, 3.0]).map(|(a, d)| a / (d * d)).sum();
            (1.0 / w.sqrt() - l).abs() < 1e-10
        });
        assert!(hit, "{l}");
    }
    let stdout = run_ok(&["tensor-complex", "--tensor-file", path_str(&cube), "--trials", "1"]);
    assert!(stdout.contains("m=3 n=3 target=7"), "{stdout}");

    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"order": 2, "dim": 3, "entries": [1, 0, 0, 0, 2, 0, 0, 0, 3]}"#).unwrap();
    assert_eq!(rqi(&["tensor-real", "--tensor-file", path_str(&bad)], None).status.code(), Some(2));
    fs::write(&bad, r#"{"order": 2, "dim": 2, "entries": [1, 5, 0, 1]}"#).unwrap();
    assert_eq!(rqi(&["tensor-real", "--tensor-file", path_str(&bad)], None).status.code(), Some(2));
    fs::write(&bad, "not json").unwrap();
    assert_eq!(rqi(&["tensor-real", "--tensor-file", path_str(&bad)], None).status.code(), Some(2));
    assert_eq!(rqi(&["tensor-real", "--tensor-file", "/nonexistent/t.json"], None).status.code(), Some(2));
}

#[test]
fn failed_trials_are_recorded() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("f.csv");
    let stdout = run_ok(&["stiefel", "--n", "8", "--p", "3", "--trials", "5", "--max-iter", "1", "--output", path_str(&out)]);
    assert!(stdout.contains("converged=0"));
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 5);
    assert!(rows.iter().all(|r| &r[1] == "false" && !r[5].is_empty()));
}
