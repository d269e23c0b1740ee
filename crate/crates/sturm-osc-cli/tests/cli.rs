//! End-to-end tests of the `sturm-osc` binary: real process, real files,
//! asserted exit codes and output bytes.

use std::path::{Path, PathBuf};
use std::process::Command;

use tempfile::TempDir;

const SINE_PROBLEM: &str = "\
interval = [0, 3.141592653589793]
K = \"1\"
G = \"1\"
L = \"1\"
bc_left = dirichlet
bc_right = dirichlet
regularity = strong
";

const ROBIN_PROBLEM: &str = "\
interval = [0, 3.141592653589793]
K = \"1\"
G = \"1\"
L = \"1\"
bc_left = robin 1.5
bc_right = robin 1.5
regularity = strong
";

fn problem_file(dir: &TempDir, text: &str) -> PathBuf {
    let path = dir.path().join("problem.toml");
    std::fs::write(&path, text).unwrap();
    path
}

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn sturm_osc(args: &[&str]) -> Run {
    sturm_osc_env(args, &[])
}

fn sturm_osc_env(args: &[&str], env: &[(&str, &str)]) -> Run {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_sturm-osc"));
    cmd.args(args);
    for (key, value) in env {
        cmd.env(key, value);
    }
    let out = cmd.output().expect("binary should spawn");
    Run {
        code: out.status.code().expect("no exit code"),
        stdout: String::from_utf8(out.stdout).expect("stdout should be UTF-8"),
        stderr: String::from_utf8(out.stderr).expect("stderr should be UTF-8"),
    }
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn spectrum_table_matches_the_closed_form() {
    let dir = TempDir::new().unwrap();
    let problem = problem_file(&dir, SINE_PROBLEM);
    let run = sturm_osc(&["spectrum", "-p", path_str(&problem), "-n", "3"]);
    assert_eq!(run.code, 0, "stderr: {}", run.stderr);

    let rows: Vec<Vec<&str>> = run
        .stdout
        .lines()
        .skip(1)
        .map(|l| l.split_whitespace().collect())
        .collect();
    assert_eq!(rows.len(), 3);
    for (row, (index, rho, zeros)) in rows.iter().zip([(1, 2.0, 0), (2, 5.0, 1), (3, 10.0, 2)]) {
        assert_eq!(row[0].parse::<usize>().unwrap(), index);
        assert!((row[1].parse::<f64>().unwrap() - rho).abs() <= 1e-8);
        assert_eq!(row[2].parse::<usize>().unwrap(), zeros);
    }
}

#[test]
fn spectrum_csv_is_a_plain_table() {
    let dir = TempDir::new().unwrap();
    let problem = problem_file(&dir, SINE_PROBLEM);
    let run = sturm_osc(&[
        "spectrum",
        "-p",
        path_str(&problem),
        "-n",
        "2",
        "--format",
        "csv",
    ]);
    assert_eq!(run.code, 0);
    let lines: Vec<&str> = run.stdout.lines().collect();
    assert_eq!(lines[0], "index,rho,zeros");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("1,2.000000000000e0,0"));
}

#[test]
fn zeros_reports_the_double_zero_in_json() {
    let dir = TempDir::new().unwrap();
    let problem = problem_file(&dir, SINE_PROBLEM);
    let run = sturm_osc(&[
        "zeros",
        "-p",
        path_str(&problem),
        "--coeffs",
        "1@1,1@3",
        "--format",
        "json",
    ]);
    assert_eq!(run.code, 0, "stderr: {}", run.stderr);

    let v: serde_json::Value = serde_json::from_str(&run.stdout).unwrap();
    let interior: Vec<&serde_json::Value> = v["records"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| !r["is_boundary"].as_bool().unwrap())
        .collect();
    assert_eq!(interior.len(), 1);
    let xi = interior[0]["xi"].as_f64().unwrap();
    assert!((xi - std::f64::consts::FRAC_PI_2).abs() <= 1e-9);
    assert_eq!(interior[0]["multiplicity"]["Exact"].as_u64(), Some(2));
    assert_eq!(v["count"]["n_m"].as_u64(), Some(2));
    assert_eq!(v["count"]["n_v"].as_u64(), Some(0));
}

#[test]
fn combo_evaluates_the_first_iterate() {
    let dir = TempDir::new().unwrap();
    let problem = problem_file(&dir, SINE_PROBLEM);
    let run = sturm_osc(&[
        "combo",
        "-p",
        path_str(&problem),
        "--coeffs",
        "1@1,1@3",
        "-k",
        "1",
        "--format",
        "json",
    ]);
    assert_eq!(run.code, 0, "stderr: {}", run.stderr);

    let v: serde_json::Value = serde_json::from_str(&run.stdout).unwrap();
    assert_eq!(v["k"].as_i64(), Some(1));
    let evals = v["evaluations"].as_array().unwrap();
    assert_eq!(evals.len(), 9);
    // Midpoint of the interval: Y_1(pi/2) = 8 sqrt(2/pi) for normalized modes.
    let mid = evals[4]["value"].as_f64().unwrap();
    let expected = 8.0 * (2.0 / std::f64::consts::PI).sqrt();
    assert!((mid - expected).abs() <= 1e-6, "mid = {mid}");
    assert!(v["relation_residual"].as_f64().unwrap() <= 1e-6);
}

#[test]
fn liouville_family_reports_no_relation_residual() {
    let dir = TempDir::new().unwrap();
    let problem = problem_file(&dir, SINE_PROBLEM);
    let run = sturm_osc(&[
        "combo",
        "-p",
        path_str(&problem),
        "--coeffs",
        "1@1,1@3",
        "--family",
        "liouville",
        "-k",
        "1",
        "--format",
        "json",
    ]);
    assert_eq!(run.code, 0, "stderr: {}", run.stderr);
    let v: serde_json::Value = serde_json::from_str(&run.stdout).unwrap();
    assert!(v["relation_residual"].is_null());
}

#[test]
fn verify_st2_passes_on_the_double_zero_case() {
    let dir = TempDir::new().unwrap();
    let problem = problem_file(&dir, SINE_PROBLEM);
    let run = sturm_osc(&[
        "verify",
        "st2",
        "-p",
        path_str(&problem),
        "--coeffs",
        "1@1,1@3",
    ]);
    assert_eq!(run.code, 0, "stderr: {}", run.stderr);
    assert!(run.stdout.contains("5/5 checks passed"));
    assert!(run.stdout.contains("N_bar_m <= n-1"));
}

#[test]
fn verify_mono_covers_the_default_exponent_range() {
    let dir = TempDir::new().unwrap();
    let problem = problem_file(&dir, SINE_PROBLEM);
    let run = sturm_osc(&[
        "verify",
        "mono",
        "-p",
        path_str(&problem),
        "--coeffs",
        "1@1,1@3",
    ]);
    assert_eq!(run.code, 0, "stderr: {}", run.stderr);
    assert!(run.stdout.contains("k=-2:"));
    assert!(run.stdout.contains("k=2:"));
    assert!(run.stdout.contains("3/3 checks passed"));
}

#[test]
fn verify_suite_output_is_byte_reproducible() {
    let args = [
        "verify", "suite", "--seed", "7", "--trials", "2", "--format", "json",
    ];
    let first = sturm_osc(&args);
    let second = sturm_osc(&args);
    assert_eq!(first.code, 0, "stderr: {}", first.stderr);
    assert_eq!(first.stdout, second.stdout);

    let v: serde_json::Value = serde_json::from_str(&first.stdout).unwrap();
    assert_eq!(v["seed"].as_u64(), Some(7));
    assert!(v["checks"].as_array().unwrap().len() >= 16);
}

#[test]
fn evolve_count_never_increases() {
    let dir = TempDir::new().unwrap();
    let problem = problem_file(&dir, SINE_PROBLEM);
    let run = sturm_osc(&[
        "evolve",
        "-p",
        path_str(&problem),
        "--coeffs",
        "1@1,1@3",
        "--t",
        "0:1:0.25",
        "--format",
        "csv",
    ]);
    assert_eq!(run.code, 0, "stderr: {}", run.stderr);
    let counts: Vec<usize> = run
        .stdout
        .lines()
        .skip(1)
        .take_while(|l| !l.is_empty())
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(counts.first(), Some(&1));
    assert!(counts.windows(2).all(|w| w[1] <= w[0]));
    assert_eq!(counts.last(), Some(&0));
}

#[test]
fn emit_samples_dumps_the_profile() {
    let dir = TempDir::new().unwrap();
    let problem = problem_file(&dir, SINE_PROBLEM);
    let samples = dir.path().join("samples.csv");
    let run = sturm_osc(&[
        "zeros",
        "-p",
        path_str(&problem),
        "--coeffs",
        "1@1,1@3",
        "--emit-samples",
        path_str(&samples),
    ]);
    assert_eq!(run.code, 0, "stderr: {}", run.stderr);

    let text = std::fs::read_to_string(&samples).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x,y");
    assert_eq!(lines.len(), 514);
    let parse = |line: &str| -> (f64, f64) {
        let (x, y) = line.split_once(',').unwrap();
        (x.parse().unwrap(), y.parse().unwrap())
    };
    let xs: Vec<f64> = lines[1..].iter().map(|l| parse(l).0).collect();
    assert!(xs.windows(2).all(|w| w[0] < w[1]));
    let (_, y_left) = parse(lines[1]);
    assert!(y_left.abs() < 1e-9, "Dirichlet end should vanish");
}

#[test]
fn robin_problems_parse_through_the_cli() {
    let dir = TempDir::new().unwrap();
    let problem = problem_file(&dir, ROBIN_PROBLEM);
    let run = sturm_osc(&["spectrum", "-p", path_str(&problem), "-n", "2"]);
    assert_eq!(run.code, 0, "stderr: {}", run.stderr);
    assert_eq!(run.stdout.lines().count(), 3);
}

#[test]
fn missing_problem_file_exits_one() {
    let run = sturm_osc(&["spectrum", "-p", "/no/such/file.toml"]);
    assert_eq!(run.code, 1);
    assert!(run.stderr.contains("error"));
    assert!(run.stdout.is_empty());
}

#[test]
fn malformed_inputs_exit_one() {
    let dir = TempDir::new().unwrap();
    let problem = problem_file(&dir, SINE_PROBLEM);
    let p = path_str(&problem);

    let run = sturm_osc(&["zeros", "-p", p, "--coeffs", "1@"]);
    assert_eq!(run.code, 1);
    assert!(run.stderr.contains("mode index"));

    let run = sturm_osc(&["evolve", "-p", p, "--coeffs", "1@1", "--t", "5:0:0.1"]);
    assert_eq!(run.code, 1);

    let run = sturm_osc(&["spectrum", "-p", p, "--bogus-flag"]);
    assert_eq!(run.code, 1);
}

#[test]
fn thread_cap_env_is_validated() {
    let dir = TempDir::new().unwrap();
    let problem = problem_file(&dir, SINE_PROBLEM);
    let p = path_str(&problem);

    let run = sturm_osc_env(
        &["spectrum", "-p", p, "-n", "1"],
        &[("STURM_OSC_THREADS", "1")],
    );
    assert_eq!(run.code, 0, "stderr: {}", run.stderr);

    let run = sturm_osc_env(
        &["spectrum", "-p", p, "-n", "1"],
        &[("STURM_OSC_THREADS", "0")],
    );
    assert_eq!(run.code, 1);
    assert!(run.stderr.contains("STURM_OSC_THREADS"));
}

#[test]
fn help_is_not_a_failure() {
    let run = sturm_osc(&["--help"]);
    assert_eq!(run.code, 0);
    assert!(run.stdout.contains("spectrum"));
    assert!(run.stdout.contains("verify"));
}
