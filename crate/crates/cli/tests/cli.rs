//! End-to-end tests driving the installed binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn btsched(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_btsched"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_ok(args: &[&str]) -> serde_json::Value {
    let out = btsched(args);
    assert!(
        out.status.success(),
        "command {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8(out.stdout).unwrap();
    serde_json::from_str(stdout.lines().last().unwrap_or("")).expect("JSON summary line")
}

fn run_err(args: &[&str]) -> serde_json::Value {
    let out = btsched(args);
    assert!(!out.status.success(), "command {args:?} unexpectedly passed");
    let stderr = String::from_utf8(out.stderr).unwrap();
    let line = stderr
        .lines()
        .rev()
        .find(|l| l.trim_start().starts_with('{'))
        .unwrap_or_else(|| panic!("no JSON error line in stderr: {stderr}"));
    serde_json::from_str(line).expect("machine-readable error line")
}

fn path_str(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn gen_cov_toeplitz_writes_the_expected_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.csv");
    let summary = run_ok(&[
        "gen-cov",
        "--structure",
        "toeplitz",
        "--n",
        "3",
        "--out",
        path_str(&out),
    ]);
    assert_eq!(summary["passed"], true);
    let contents = std::fs::read_to_string(&out).unwrap();
    assert_eq!(contents.lines().next().unwrap(), "1,0.5,0.25");
}

#[test]
fn gen_cov_is_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        run_ok(&[
            "gen-cov",
            "--structure",
            "laplacian",
            "--n",
            "8",
            "--p",
            "0.5",
            "--seed",
            "7",
            "--out",
            path_str(out),
        ]);
    }
    assert_eq!(
        std::fs::read(&a).unwrap(),
        std::fs::read(&b).unwrap(),
        "same seed should produce identical files"
    );
}

#[test]
fn gen_cov_rejects_small_invwishart_dof() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.csv");
    let err = run_err(&[
        "gen-cov",
        "--structure",
        "invwishart",
        "--n",
        "4",
        "--dof",
        "4",
        "--out",
        path_str(&out),
    ]);
    assert!(err["error"].as_str().unwrap().contains("dof"));
}

#[test]
fn gen_cov_accepts_a_user_adjacency() {
    let dir = tempfile::tempdir().unwrap();
    let mtx = dir.path().join("graph.mtx");
    std::fs::write(
        &mtx,
        "%%MatrixMarket matrix coordinate pattern symmetric\n2 2 1\n2 1\n",
    )
    .unwrap();
    let out = dir.path().join("c.csv");
    run_ok(&[
        "gen-cov",
        "--structure",
        "expm",
        "--n",
        "2",
        "--adjacency",
        path_str(&mtx),
        "--out",
        path_str(&out),
    ]);
    let contents = std::fs::read_to_string(&out).unwrap();
    let first_row: Vec<f64> = contents
        .lines()
        .next()
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    assert_eq!(first_row[0], 1.0);
    assert!((first_row[1] - 1f64.tanh()).abs() < 1e-12);
}

fn write_identity(dir: &Path, n: usize) -> PathBuf {
    let path = dir.join("identity.csv");
    let rows: Vec<String> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { "1" } else { "0" }.to_string())
                .collect::<Vec<_>>()
                .join(",")
        })
        .collect();
    std::fs::write(&path, rows.join("\n")).unwrap();
    path
}

#[test]
fn design_methods_agree_on_identity_prior() {
    let dir = tempfile::tempdir().unwrap();
    let cov = write_identity(dir.path(), 4);
    for method in ["exact", "rbd", "closed"] {
        let out = dir.path().join(format!("{method}.json"));
        let summary = run_ok(&[
            "design",
            "--cov",
            path_str(&cov),
            "--method",
            method,
            "--out",
            path_str(&out),
        ]);
        assert_eq!(summary["n"], 4);
        let schedule: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
        let pairs = schedule["pairs"].as_array().unwrap();
        assert_eq!(pairs.len(), 6);
        for pair in pairs {
            let q = pair["q"].as_f64().unwrap();
            assert!((q - 1.0 / 6.0).abs() < 1e-12, "{method}: q = {q}");
        }
    }
}

#[test]
fn design_refuses_large_dense_construction_without_force() {
    let dir = tempfile::tempdir().unwrap();
    let cov = dir.path().join("big.csv");
    run_ok(&[
        "gen-cov",
        "--structure",
        "toeplitz",
        "--n",
        "300",
        "--out",
        path_str(&cov),
    ]);
    let out = dir.path().join("s.json");
    let err = run_err(&[
        "design",
        "--cov",
        path_str(&cov),
        "--method",
        "exact",
        "--out",
        path_str(&out),
    ]);
    let message = err["error"].as_str().unwrap();
    assert!(message.contains("256"), "cap not named: {message}");
}

#[test]
fn compare_reports_zero_against_self_and_small_kl_for_rbd() {
    let dir = tempfile::tempdir().unwrap();
    let cov = dir.path().join("cov.csv");
    run_ok(&[
        "gen-cov",
        "--structure",
        "laplacian",
        "--n",
        "8",
        "--p",
        "0.5",
        "--seed",
        "3",
        "--out",
        path_str(&cov),
    ]);
    let exact = dir.path().join("exact.json");
    let rbd = dir.path().join("rbd.json");
    run_ok(&["design", "--cov", path_str(&cov), "--method", "exact", "--out", path_str(&exact)]);
    run_ok(&["design", "--cov", path_str(&cov), "--method", "rbd", "--out", path_str(&rbd)]);

    let self_compare = run_ok(&["compare", path_str(&exact), path_str(&exact)]);
    assert_eq!(self_compare["kl_forward"].as_f64().unwrap(), 0.0);
    assert_eq!(self_compare["max_abs_diff"].as_f64().unwrap(), 0.0);

    let cross = run_ok(&["compare", path_str(&exact), path_str(&rbd)]);
    assert!(cross["kl_forward"].as_f64().unwrap() < 1e-12);
    assert!(cross["kl_reverse"].as_f64().unwrap() < 1e-12);
}

#[test]
fn compare_rejects_mismatched_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let small = write_identity(dir.path(), 4);
    let cov5 = dir.path().join("five.csv");
    run_ok(&["gen-cov", "--structure", "toeplitz", "--n", "5", "--out", path_str(&cov5)]);
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    run_ok(&["design", "--cov", path_str(&small), "--method", "closed", "--out", path_str(&a)]);
    run_ok(&["design", "--cov", path_str(&cov5), "--method", "closed", "--out", path_str(&b)]);
    run_err(&["compare", path_str(&a), path_str(&b)]);
}

#[test]
fn sample_respects_a_degenerate_schedule_and_its_seed() {
    let dir = tempfile::tempdir().unwrap();
    let schedule = dir.path().join("point.json");
    std::fs::write(
        &schedule,
        serde_json::json!({
            "n": 3,
            "method": "closed",
            "pairs": [
                {"i": 1, "j": 2, "q": 0.0},
                {"i": 1, "j": 3, "q": 1.0},
                {"i": 2, "j": 3, "q": 0.0}
            ],
            "meta": {"tol": null, "d": null, "residual": null, "seconds": 0.0}
        })
        .to_string(),
    )
    .unwrap();
    let out = dir.path().join("draws.csv");
    run_ok(&[
        "sample",
        "--schedule",
        path_str(&schedule),
        "--n",
        "50",
        "--seed",
        "5",
        "--out",
        path_str(&out),
    ]);
    let contents = std::fs::read_to_string(&out).unwrap();
    let mut lines = contents.lines();
    assert_eq!(lines.next().unwrap(), "index,i,j");
    for (idx, line) in lines.enumerate() {
        assert_eq!(line, format!("{},1,3", idx + 1));
    }

    let again = dir.path().join("draws2.csv");
    run_ok(&[
        "sample",
        "--schedule",
        path_str(&schedule),
        "--n",
        "50",
        "--seed",
        "5",
        "--out",
        path_str(&again),
    ]);
    assert_eq!(std::fs::read(&out).unwrap(), std::fs::read(&again).unwrap());
}

#[test]
fn bt_fit_with_no_comparisons_returns_the_prior() {
    let dir = tempfile::tempdir().unwrap();
    let comparisons = dir.path().join("empty.csv");
    std::fs::write(&comparisons, "i,j,y,n\n").unwrap();
    let out = dir.path().join("posterior.json");
    let summary = run_ok(&[
        "bt-fit",
        "--comparisons",
        path_str(&comparisons),
        "--n-objects",
        "4",
        "--prior-sd",
        "5",
        "--out",
        path_str(&out),
    ]);
    assert_eq!(summary["converged"], true);

    let posterior: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    for value in posterior["map"].as_array().unwrap() {
        assert_eq!(value.as_f64().unwrap(), 0.0);
    }
    for (i, row) in posterior["covariance"].as_array().unwrap().iter().enumerate() {
        for (j, value) in row.as_array().unwrap().iter().enumerate() {
            let expected = if i == j { 25.0 } else { 0.0 };
            assert!((value.as_f64().unwrap() - expected).abs() < 1e-10);
        }
    }
}

#[test]
fn winner_rows_and_count_rows_fit_identically() {
    let dir = tempfile::tempdir().unwrap();
    let winners = dir.path().join("winners.csv");
    std::fs::write(
        &winners,
        "i,j,winner\n1,2,1\n1,2,1\n1,2,2\n2,3,2\n1,3,3\n1,3,3\n",
    )
    .unwrap();
    let counts = dir.path().join("counts.csv");
    std::fs::write(&counts, "i,j,y,n\n1,2,2,3\n2,3,1,1\n1,3,0,2\n").unwrap();

    let mut outputs = Vec::new();
    for input in [&winners, &counts] {
        let out = dir.path().join(format!(
            "{}.json",
            input.file_stem().unwrap().to_str().unwrap()
        ));
        run_ok(&[
            "bt-fit",
            "--comparisons",
            path_str(input),
            "--prior-sd",
            "5",
            "--out",
            path_str(&out),
        ]);
        let posterior: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
        outputs.push(posterior);
    }
    assert_eq!(outputs[0]["map"], outputs[1]["map"]);
    assert_eq!(outputs[0]["covariance"], outputs[1]["covariance"]);
}

#[test]
fn pipeline_writes_a_schedule_and_stage_timings() {
    let dir = tempfile::tempdir().unwrap();
    let comparisons = dir.path().join("phase1.csv");
    std::fs::write(
        &comparisons,
        "i,j,winner\n1,2,1\n3,4,4\n5,6,5\n1,6,6\n2,5,2\n3,6,3\n",
    )
    .unwrap();
    let out = dir.path().join("phase2.json");
    let summary = run_ok(&[
        "pipeline",
        "--comparisons",
        path_str(&comparisons),
        "--prior-sd",
        "5",
        "--out-schedule",
        path_str(&out),
    ]);
    assert_eq!(summary["n"], 6);
    assert_eq!(summary["d"], 5);
    assert!(summary["fit_seconds"].as_f64().unwrap() > 0.0);
    assert!(summary["design_seconds"].as_f64().unwrap() > 0.0);
    assert!(
        summary["total_seconds"].as_f64().unwrap()
            >= summary["design_seconds"].as_f64().unwrap()
    );

    let schedule: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let total: f64 = schedule["pairs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p["q"].as_f64().unwrap())
        .sum();
    assert!((total - 1.0).abs() < 1e-10);
}

#[test]
fn benchmark_writes_rows_and_summary_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bench");
    let summary = run_ok(&[
        "benchmark",
        "--structures",
        "laplacian",
        "--n-list",
        "8,12",
        "--reps",
        "2",
        "--seed",
        "1",
        "--out",
        path_str(&out),
    ]);
    assert!(summary["max_kl"].as_f64().unwrap() < 1e-12);

    let csv = std::fs::read_to_string(dir.path().join("bench.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    assert_eq!(
        header,
        "structure,n,param,method,seed,rep,wall_time_seconds,kl_vs_exact,rbd_dim,status"
    );
    assert_eq!(csv.lines().count(), 1 + 2 * 2 * 2);

    let parsed: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("bench.json")).unwrap())
            .unwrap();
    assert!(parsed["slopes"]["exact"].is_number());
    assert!(parsed["slopes"]["rbd"].is_number());

    // same seed, same KL column (times may differ)
    let kl_column = |text: &str| -> Vec<String> {
        text.lines()
            .skip(1)
            .map(|l| l.split(',').nth(7).unwrap().to_string())
            .collect()
    };
    let out2 = dir.path().join("bench2");
    run_ok(&[
        "benchmark",
        "--structures",
        "laplacian",
        "--n-list",
        "8,12",
        "--reps",
        "2",
        "--seed",
        "1",
        "--out",
        path_str(&out2),
    ]);
    let csv2 = std::fs::read_to_string(dir.path().join("bench2.csv")).unwrap();
    assert_eq!(kl_column(&csv), kl_column(&csv2));
}

#[test]
fn sampled_frequencies_track_the_schedule() {
    let dir = tempfile::tempdir().unwrap();
    let cov = write_identity(dir.path(), 4);
    let schedule = dir.path().join("uniform.json");
    run_ok(&["design", "--cov", path_str(&cov), "--method", "closed", "--out", path_str(&schedule)]);

    let draws = dir.path().join("draws.csv");
    let n_draws = 60_000usize;
    run_ok(&[
        "sample",
        "--schedule",
        path_str(&schedule),
        "--n",
        "60000",
        "--seed",
        "11",
        "--out",
        path_str(&draws),
    ]);
    let contents = std::fs::read_to_string(&draws).unwrap();
    let mut counts = std::collections::HashMap::new();
    for line in contents.lines().skip(1) {
        let mut fields = line.split(',');
        let _ = fields.next();
        let i: usize = fields.next().unwrap().parse().unwrap();
        let j: usize = fields.next().unwrap().parse().unwrap();
        assert!(i < j && j <= 4);
        *counts.entry((i, j)).or_insert(0usize) += 1;
    }
    // 4 standard deviations around n/6 for each of the six pairs
    let expected = n_draws as f64 / 6.0;
    let sd = (n_draws as f64 * (1.0 / 6.0) * (5.0 / 6.0)).sqrt();
    assert_eq!(counts.len(), 6);
    for (&pair, &count) in &counts {
        assert!(
            (count as f64 - expected).abs() <= 4.0 * sd,
            "pair {pair:?}: count {count} outside 4 sd of {expected}"
        );
    }
}

#[test]
fn schedule_csv_format_round_trips_through_sample() {
    let dir = tempfile::tempdir().unwrap();
    let cov = write_identity(dir.path(), 4);
    let out = dir.path().join("s.csv");
    run_ok(&[
        "design",
        "--cov",
        path_str(&cov),
        "--method",
        "closed",
        "--format",
        "csv",
        "--out",
        path_str(&out),
    ]);
    let contents = std::fs::read_to_string(&out).unwrap();
    assert_eq!(contents.lines().next().unwrap(), "i,j,q");

    let draws = dir.path().join("draws.csv");
    run_ok(&[
        "sample",
        "--schedule",
        path_str(&out),
        "--n",
        "10",
        "--seed",
        "0",
        "--out",
        path_str(&draws),
    ]);
    assert_eq!(std::fs::read_to_string(&draws).unwrap().lines().count(), 11);
}

#[test]
fn tiny_rbd_tolerance_prints_the_warning() {
    let dir = tempfile::tempdir().unwrap();
    let cov = write_identity(dir.path(), 6);
    let out = dir.path().join("s.json");
    let output = btsched(&[
        "design",
        "--cov",
        path_str(&cov),
        "--method",
        "rbd",
        "--tol",
        "1e-14",
        "--out",
        path_str(&out),
    ]);
    assert!(output.status.success());
    let stderr = String::from_utf8(output.stderr).unwrap();
    assert!(
        stderr.contains("warning") && stderr.contains("1e-12"),
        "missing tolerance warning: {stderr}"
    );
}
