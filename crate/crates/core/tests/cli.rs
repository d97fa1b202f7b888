use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use num_complex::Complex64;
use pbergman::minimizer::disk_bergman_kernel;

fn pbergman(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pbergman"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.toml");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

fn col(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap()
}

#[test]
fn kernel_rows_match_the_disk_bergman_kernel() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "points = [[[0.0, 0.0]], [[0.25, 0.0]], [[0.5, 0.0]]]\np = [2.0]\n");
    let out = pbergman(dir.path(), &["kernel", "--config", &cfg, "--out", "k"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (h, rows) = csv_rows(&dir.path().join("k/kernel.csv"));
    assert_eq!(rows.len(), 3);
    for (r, z) in rows.iter().zip([0.0, 0.25, 0.5]) {
        let k: f64 = r[col(&h, "K_p")].parse().unwrap();
        let zc = Complex64::new(z, 0.0);
        let exact = disk_bergman_kernel(zc, zc).re;
        assert!((k - exact).abs() / exact < 1e-6, "z={z}: {k} vs {exact}");
        assert_eq!(r[col(&h, "status")], "ok");
    }
}

#[test]
fn kernel_with_no_points_writes_only_the_header() {
    let dir = tempfile::tempdir().unwrap();
    let out = pbergman(dir.path(), &["kernel", "--out", "k", "--p", "2"]);
    assert!(out.status.success());
    let text = fs::read_to_string(dir.path().join("k/kernel.csv")).unwrap();
    assert_eq!(text, "z_re,z_im,p,m_p,K_p,iterations,gradient_residual,status\n");
}

#[test]
fn exponent_below_one_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "p = [0.5]\npoints = [[[0.0, 0.0]]]\n");
    let out = pbergman(dir.path(), &["kernel", "--config", &cfg, "--out", "k"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains(">= 1"));
    assert!(!dir.path().join("k").exists());
}

#[test]
fn coefficient_dump_has_one_record_per_row() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "points = [[[0.1, 0.2]]]\np = [2.0, 3.0]\ndump_coefficients = true\n");
    let out = pbergman(dir.path(), &["kernel", "--config", &cfg, "--out", "k", "--degree", "8", "--quad", "16x32"]);
    assert!(out.status.success());
    let text = fs::read_to_string(dir.path().join("k/coefficients.jsonl")).unwrap();
    assert_eq!(text.lines().count(), 2);
    let rec: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(rec["coefficients"].as_array().unwrap().len(), 9);
}

#[test]
fn single_point_gives_a_zero_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "points = [[[0.3, -0.2]]]\n");
    let out = pbergman(dir.path(), &["distance", "--config", &cfg, "--out", "d", "--p", "3"]);
    assert!(out.status.success());
    let (h, rows) = csv_rows(&dir.path().join("d/distance.csv"));
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][col(&h, "rho")].parse::<f64>().unwrap(), 0.0);
}

#[test]
fn distance_matrix_is_symmetric_with_the_p2_value() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "points = [[[0.0, 0.0]], [[0.5, 0.0]], [[-0.1, 0.4]]]\np = [2.0]\n");
    let out = pbergman(dir.path(), &["distance", "--config", &cfg, "--out", "d"]);
    assert!(out.status.success());
    let (h, rows) = csv_rows(&dir.path().join("d/distance.csv"));
    assert_eq!(h, ["z_re", "z_im", "w_re", "w_im", "p", "rho", "theta_opt"]);
    assert_eq!(rows.len(), 9);
    let rho = |i: usize, j: usize| rows[3 * i + j][col(&h, "rho")].parse::<f64>().unwrap();
    assert!((rho(0, 1) - 0.5f64.sqrt()).abs() < 1e-4);
    for i in 0..3 {
        assert_eq!(rho(i, i), 0.0);
        for j in 0..3 {
            assert!((rho(i, j) - rho(j, i)).abs() < 1e-9);
        }
    }
    // 17 significant digits
    assert!(rows[1][col(&h, "rho")].contains("e-1"));
    assert_eq!(rows[1][col(&h, "rho")].split('e').next().unwrap().len(), 18);
}

#[test]
fn metric_axiom_suite_on_100_triples_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[verify.settings]\ntriples = 100\n");
    let out = pbergman(dir.path(), &["verify", "--config", &cfg, "--suite", "metric-axioms", "--out", "v"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let lines = fs::read_to_string(dir.path().join("v/reports.jsonl")).unwrap();
    // symmetry, triangle and identity per triple, three exponents
    assert_eq!(lines.lines().count(), 900);
    let summary = fs::read_to_string(dir.path().join("v/summary.txt")).unwrap();
    assert!(summary.contains("overall: PASS"));
}

#[test]
fn main_inequality_at_p4_gives_100_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = pbergman(dir.path(), &["verify", "--suite", "main-inequality", "--p", "4", "--out", "v"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let text = fs::read_to_string(dir.path().join("v/reports.jsonl")).unwrap();
    assert_eq!(text.lines().count(), 100);
    for l in text.lines() {
        let v: serde_json::Value = serde_json::from_str(l).unwrap();
        assert_eq!(v["verdict"], "pass");
    }
}

#[test]
fn unknown_suite_lists_the_valid_ones() {
    let dir = tempfile::tempdir().unwrap();
    let out = pbergman(dir.path(), &["verify", "--suite", "nope"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("metric-axioms") && err.contains("p-continuity"), "{err}");

    let cfg = write_config(dir.path(), "[verify]\nsuites = [\"nope\"]\n");
    let out = pbergman(dir.path(), &["verify", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("metric-axioms"), "{err}");
}

#[test]
fn malformed_config_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "seed = \"x\"\n");
    let out = pbergman(dir.path(), &["constants", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn failing_checks_exit_nonzero() {
    // far too coarse for the closed form to match
    let dir = tempfile::tempdir().unwrap();
    let out = pbergman(
        dir.path(),
        &["verify", "--suite", "disk-oracle", "--p", "2", "--degree", "2", "--quad", "4x8", "--out", "v"],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("overall: FAIL"));
}

#[test]
fn sweep_and_constants_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = pbergman(dir.path(), &["sweep", "--out", "s", "--degree", "16", "--quad", "32x64"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (h, rows) = csv_rows(&dir.path().join("s/sweep.csv"));
    assert_eq!(h, ["p", "q", "rho_p", "rho_q", "gap"]);
    assert_eq!(rows.len(), 6);

    let out = pbergman(dir.path(), &["constants", "--out", "c", "--p", "4"]);
    assert!(out.status.success());
    let (h, rows) = csv_rows(&dir.path().join("c/constants.csv"));
    let c: f64 = rows[0][col(&h, "C_p")].parse().unwrap();
    assert!((c - 6.0 * 3f64.sqrt()).abs() < 1e-12);
    let out = pbergman(dir.path(), &["constants", "--p", "2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for o in ["a", "b"] {
        let out = pbergman(
            dir.path(),
            &["verify", "--suite", "p2-distance", "--suite", "taylor-inequalities", "--seed", "11", "--out", o],
        );
        assert!(out.status.success());
    }
    for f in ["reports.jsonl", "summary.txt"] {
        let a = fs::read(dir.path().join("a").join(f)).unwrap();
        let b = fs::read(dir.path().join("b").join(f)).unwrap();
        assert_eq!(a, b, "{f}");
    }
}
