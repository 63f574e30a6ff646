//! End-to-end tests driving the compiled binary.

use std::path::Path;
use std::process::{Command, Output};

use monodromy_core::problems::power_curve;
use monodromy_core::C64;
use serde_json::Value;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_monodromy"));
    cmd.env_remove("MONODROMY_SEED");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn run_ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "expected success for {args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn solve_json(args: &[&str]) -> Value {
    serde_json::from_str(&run_ok(args)).expect("report is JSON")
}

fn quad_file(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("quad.json");
    std::fs::write(
        &path,
        r#"{
  "variables": ["x"],
  "parameters": ["u0"],
  "equations": [[
    {"coeff": [1.0, 0.0], "exps": [2, 0]},
    {"coeff": [-1.0, 0.0], "exps": [0, 1]}
  ]],
  "alpha": [[{"coeff": [1.0, 0.0], "exps": [2]}]],
  "seed": {"x": [[3.0, 0.0]], "u": [[9.0, 0.0]]}
}"#,
    )
    .unwrap();
    path
}

#[test]
fn list_shows_the_catalog() {
    let text = run_ok(&["list"]);
    for needle in ["cyclic5", "70", "7", "gaussian2", "18", "9", "power10", "mixedvol"] {
        assert!(text.contains(needle), "listing lacks {needle}: {text}");
    }
}

#[test]
fn solve_power10_standard_finds_the_full_fiber() {
    let report = solve_json(&["solve", "--problem", "power", "--n", "10", "--rng-seed", "0"]);
    assert_eq!(report["points"].as_array().unwrap().len(), 20);
    assert_eq!(report["complete"], Value::Bool(true));
    assert_eq!(report["decomposition_degrees"], serde_json::json!([10, 2]));
    let classes = report["classes"].as_array().unwrap();
    assert_eq!(classes.len(), 2);
    assert!(classes.iter().all(|c| c.as_array().unwrap().len() == 10));

    // Re-verify every reported point against an independently built curve.
    let p = power_curve(10).unwrap();
    let t = C64::new(
        report["base_t"][0].as_f64().unwrap(),
        report["base_t"][1].as_f64().unwrap(),
    );
    for pt in report["points"].as_array().unwrap() {
        let coords: Vec<C64> = pt
            .as_array()
            .unwrap()
            .iter()
            .map(|c| C64::new(c[0].as_f64().unwrap(), c[1].as_f64().unwrap()))
            .collect();
        assert!(p.curve.residual_norm(&coords, t) < 1e-6);
    }
}

#[test]
fn solve_cyclic5_decomposable_reports_seven_classes() {
    let report = solve_json(&[
        "solve",
        "--problem",
        "cyclic5",
        "--mode",
        "decomposable",
        "--rng-seed",
        "7",
    ]);
    assert_eq!(report["stats"]["classes_found"], serde_json::json!(7));
    assert_eq!(report["complete"], Value::Bool(true));

    // The classes partition the point indices.
    let n_points = report["points"].as_array().unwrap().len();
    let mut seen = vec![false; n_points];
    for class in report["classes"].as_array().unwrap() {
        for idx in class.as_array().unwrap() {
            let i = idx.as_u64().unwrap() as usize;
            assert!(!seen[i], "index {i} appears twice");
            seen[i] = true;
        }
    }
    assert!(seen.iter().all(|&s| s));
}

#[test]
fn solve_mixedvol_decomposable_reports_two_classes() {
    let report = solve_json(&["solve", "--problem", "mixedvol", "--mode", "decomposable"]);
    assert_eq!(report["stats"]["classes_found"], serde_json::json!(2));
    assert_eq!(report["complete"], Value::Bool(true));
}

#[test]
fn reports_are_deterministic_for_a_fixed_seed() {
    let args = [
        "solve",
        "--problem",
        "cyclic5",
        "--mode",
        "decomposable",
        "--rng-seed",
        "5",
    ];
    let mut a = solve_json(&args);
    let mut b = solve_json(&args);
    a["stats"]["wall_ms"] = serde_json::json!(0);
    b["stats"]["wall_ms"] = serde_json::json!(0);
    assert_eq!(a, b);
}

#[test]
fn report_files_round_trip_bit_identically() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    run_ok(&[
        "solve",
        "--problem",
        "gaussian2",
        "--rng-seed",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    let first: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let rewritten = serde_json::to_string_pretty(&first).unwrap();
    let second: Value = serde_json::from_str(&rewritten).unwrap();
    assert_eq!(first["points"], second["points"]);
    assert_eq!(first, second);
}

#[test]
fn solve_writes_a_stats_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("stats.csv");
    let out = dir.path().join("report.json");
    run_ok(&[
        "solve",
        "--problem",
        "power2",
        "--rng-seed",
        "1",
        "--out",
        out.to_str().unwrap(),
        "--stats-csv",
        csv_path.to_str().unwrap(),
    ]);
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(
        lines[0],
        "problem,mode,seed,loops_taken,paths_tracked,path_failures,points_found,classes_found,wall_ms"
    );
    assert!(lines[1].starts_with("power2,standard,1,"));
}

#[test]
fn environment_seed_is_used_and_the_flag_wins() {
    let from_env = {
        let out = bin()
            .env("MONODROMY_SEED", "7")
            .args(["solve", "--problem", "power2"])
            .output()
            .unwrap();
        assert!(out.status.success());
        String::from_utf8(out.stdout).unwrap()
    };
    let from_flag = run_ok(&["solve", "--problem", "power2", "--rng-seed", "7"]);
    let mut a: Value = serde_json::from_str(&from_env).unwrap();
    let mut b: Value = serde_json::from_str(&from_flag).unwrap();
    a["stats"]["wall_ms"] = serde_json::json!(0);
    b["stats"]["wall_ms"] = serde_json::json!(0);
    assert_eq!(a, b);

    let overridden = {
        let out = bin()
            .env("MONODROMY_SEED", "3")
            .args(["solve", "--problem", "power2", "--rng-seed", "7"])
            .output()
            .unwrap();
        assert!(out.status.success());
        String::from_utf8(out.stdout).unwrap()
    };
    let c: Value = serde_json::from_str(&overridden).unwrap();
    assert_eq!(c["stats"]["seed"], serde_json::json!(7));
}

#[test]
fn config_errors_exit_nonzero() {
    let cases: &[&[&str]] = &[
        &["solve", "--problem", "nope"],
        &["solve", "--problem", "power", "--n", "1"],
        &["solve", "--problem", "cyclic", "--n", "9"],
        &["solve", "--problem", "power2", "--mode", "both"],
        &["solve", "--input", "/definitely/not/here.json"],
        &["solve"],
        &["bench", "--problem", "power2", "--repeats", "0"],
    ];
    for args in cases {
        let out = run(args);
        assert!(!out.status.success(), "expected failure for {args:?}");
    }

    // Selector and input file are mutually exclusive (clap usage error).
    let dir = tempfile::tempdir().unwrap();
    let quad = quad_file(dir.path());
    let out = run(&[
        "solve",
        "--problem",
        "power2",
        "--input",
        quad.to_str().unwrap(),
    ]);
    assert!(!out.status.success());
}

#[test]
fn decomposable_mode_without_a_map_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nomap.json");
    std::fs::write(
        &path,
        r#"{
  "variables": ["x"],
  "parameters": ["u0"],
  "equations": [[
    {"coeff": [1.0, 0.0], "exps": [2, 0]},
    {"coeff": [-1.0, 0.0], "exps": [0, 1]}
  ]],
  "seed": {"x": [[3.0, 0.0]], "u": [[9.0, 0.0]]}
}"#,
    )
    .unwrap();
    let out = run(&[
        "solve",
        "--input",
        path.to_str().unwrap(),
        "--mode",
        "decomposable",
    ]);
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("intermediate map"), "stderr: {stderr}");
}

#[test]
fn incomplete_runs_still_exit_zero() {
    let report = solve_json(&[
        "solve",
        "--problem",
        "power",
        "--n",
        "10",
        "--rng-seed",
        "0",
        "--max-loops",
        "3",
    ]);
    assert_eq!(report["complete"], Value::Bool(false));
    assert!(report["points"].as_array().unwrap().len() < 20);
}

#[test]
fn file_problems_solve_in_both_modes() {
    let dir = tempfile::tempdir().unwrap();
    let quad = quad_file(dir.path());
    let quad = quad.to_str().unwrap();

    let report = solve_json(&["solve", "--input", quad, "--rng-seed", "3"]);
    assert_eq!(report["problem"], serde_json::json!("quad"));
    assert_eq!(report["points"].as_array().unwrap().len(), 2);
    // Both square roots share one image under alpha = x^2.
    assert_eq!(report["classes"].as_array().unwrap().len(), 1);

    let report = solve_json(&[
        "solve",
        "--input",
        quad,
        "--mode",
        "decomposable",
        "--rng-seed",
        "3",
    ]);
    assert_eq!(report["stats"]["classes_found"], serde_json::json!(1));
    assert_eq!(report["points"].as_array().unwrap().len(), 2);
}

#[test]
fn bench_emits_run_rows_and_aggregates() {
    let text = run_ok(&[
        "bench",
        "--problem",
        "power2",
        "--mode",
        "both",
        "--repeats",
        "3",
        "--rng-seed",
        "1",
    ]);
    let lines: Vec<&str> = text.lines().collect();
    // Header, then per mode: three run rows and four aggregates.
    assert_eq!(lines.len(), 1 + 2 * (3 + 4));
    assert!(lines[1].starts_with("power2,standard,1,"));
    assert!(lines[4].starts_with("power2,standard,best,"));
    assert!(lines[8].starts_with("power2,decomposable,1,"));
    assert!(lines[11].starts_with("power2,decomposable,best,"));

    // Table-style comparison: collecting one representative per class
    // tracks fewer paths on average than full collection.
    let paths = |line: &str| line.split(',').nth(4).unwrap().parse::<f64>().unwrap();
    let standard_avg = paths(lines[5]);
    let decomposable_avg = paths(lines[12]);
    assert!(lines[5].contains("average") && lines[12].contains("average"));
    assert!(decomposable_avg < standard_avg);
}

#[test]
fn single_repeat_aggregates_collapse_to_the_run() {
    let text = run_ok(&[
        "bench",
        "--problem",
        "power2",
        "--repeats",
        "1",
        "--rng-seed",
        "2",
    ]);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 6);
    let nums = |line: &str| -> Vec<f64> {
        line.split(',')
            .skip(3)
            .map(|v| v.parse::<f64>().unwrap())
            .collect()
    };
    let run_row = nums(lines[1]);
    for aggregate in &lines[2..6] {
        assert_eq!(nums(aggregate), run_row);
    }
}

#[test]
fn bench_is_deterministic_in_its_counters() {
    let args = [
        "bench",
        "--problem",
        "cyclic5",
        "--mode",
        "decomposable",
        "--repeats",
        "2",
        "--rng-seed",
        "11",
    ];
    let strip_wall = |text: String| -> Vec<String> {
        text.lines()
            .map(|l| l.rsplit_once(',').unwrap().0.to_string())
            .collect()
    };
    assert_eq!(strip_wall(run_ok(&args)), strip_wall(run_ok(&args)));
}
