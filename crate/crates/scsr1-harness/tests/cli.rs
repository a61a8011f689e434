//! End-to-end checks of the `scsr1` binary: exit codes, CSV output,
//! determinism, and the snapshot write/verify loop.

use std::path::PathBuf;
use std::process::{Command, Output};

use scsr1_harness::table::parse_csv;

fn scsr1(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scsr1"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("utf8 output")
}

#[test]
fn run_emits_passing_csv_and_exit_zero() {
    let out = scsr1(&[
        "run",
        "--experiment",
        "e1",
        "--n",
        "500",
        "--seed",
        "7",
        "--trials",
        "3",
        "--format",
        "csv",
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let rows = parse_csv(&stdout(&out)).expect("valid csv");
    assert_eq!(rows.len(), 3);
    for row in rows {
        assert_eq!(row.n, 500);
        assert!(row.error.is_none());
        assert!(row.opt1 <= 1e-6, "opt1 {}", row.opt1);
        assert!(row.itns <= 10);
    }
}

#[test]
fn csv_is_deterministic_up_to_time() {
    let args = [
        "run",
        "--experiment",
        "e5",
        "--n",
        "300",
        "--seed",
        "11",
        "--trials",
        "2",
        "--format",
        "csv",
    ];
    let a = parse_csv(&stdout(&scsr1(&args))).unwrap();
    let b = parse_csv(&stdout(&scsr1(&args))).unwrap();
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.n, y.n);
        assert_eq!(x.opt1.to_bits(), y.opt1.to_bits());
        assert_eq!(x.opt2.to_bits(), y.opt2.to_bits());
        assert_eq!(x.lam1_plus_sigpar.to_bits(), y.lam1_plus_sigpar.to_bits());
        assert_eq!(x.gamma_plus_sigperp.to_bits(), y.gamma_plus_sigperp.to_bits());
        assert_eq!(x.sigma_par.to_bits(), y.sigma_par.to_bits());
        assert_eq!(x.sigma_perp.to_bits(), y.sigma_perp.to_bits());
        assert_eq!(x.itns, y.itns);
    }
}

#[test]
fn pinf_and_gscale_run_clean() {
    let out = scsr1(&[
        "run",
        "--experiment",
        "e4",
        "--n",
        "400",
        "--seed",
        "3",
        "--norm",
        "pinf",
        "--gscale",
        "1e-4",
        "--format",
        "csv",
    ]);
    assert!(out.status.success());
    let rows = parse_csv(&stdout(&out)).unwrap();
    assert_eq!(rows[0].itns, 0, "componentwise solve needs no iterations");
}

#[test]
fn snapshot_write_then_verify() {
    let dir: PathBuf = std::env::temp_dir().join("scsr1-cli-snaps");
    let _ = std::fs::remove_dir_all(&dir);
    let out = scsr1(&[
        "run",
        "--experiment",
        "e6",
        "--n",
        "120",
        "--seed",
        "5",
        "--format",
        "csv",
        "--snapshot-dir",
        dir.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let snap = dir.join("e6_n120_seed5_trial0.snap");
    assert!(snap.exists(), "snapshot file written");

    let out = scsr1(&["verify", "--input", snap.to_str().unwrap(), "--format", "csv"]);
    assert!(out.status.success(), "verify must pass on a fresh snapshot");
    let rows = parse_csv(&stdout(&out)).unwrap();
    assert_eq!(rows.len(), 1);
    // The saved problem is the hard case: no Newton steps, σ∥ = −λ₁.
    assert_eq!(rows[0].itns, 0);
    assert!(rows[0].lam1_plus_sigpar.abs() <= 1e-10);

    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn verify_missing_file_fails() {
    let out = scsr1(&["verify", "--input", "/nonexistent/path.snap"]);
    assert!(!out.status.success());
}

#[test]
fn verify_rejects_inconsistent_shaped_spectrum() {
    use scsr1_harness::snapshot::{read_snapshot, write_snapshot};
    let dir: PathBuf = std::env::temp_dir().join("scsr1-cli-badsnap");
    let _ = std::fs::remove_dir_all(&dir);
    let out = scsr1(&[
        "run",
        "--experiment",
        "e3",
        "--n",
        "80",
        "--seed",
        "9",
        "--format",
        "csv",
        "--snapshot-dir",
        dir.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let path = dir.join("e3_n80_seed9_trial0.snap");
    let mut snap = read_snapshot(&path).unwrap();
    // Drop one shaped eigenvalue: the override no longer matches the
    // factorization rank and verification must fail, not guess.
    snap.lambda.as_mut().unwrap().pop();
    write_snapshot(&path, &snap).unwrap();
    let out = scsr1(&["verify", "--input", path.to_str().unwrap()]);
    assert!(!out.status.success());
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn pretty_output_lists_status_column() {
    let out = scsr1(&["run", "--experiment", "e2", "--n", "200", "--seed", "1"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("opt 1"));
    assert!(text.contains("ok"));
}
