//! Problem snapshots: a JSON header line followed by column-major CSV
//! blocks for `S`, `Y`, and `g`.
//!
//! Header fields are `{n, m, gamma, seed, delta, lambda?}`; `lambda`,
//! when present, records a shaped spectrum so verification reproduces
//! the exact generated problem rather than the natural one implied by
//! the pairs. Each matrix block is one name line followed by one CSV
//! line per column (so `S` and `Y` carry `m` lines of `n` values and `g`
//! a single line).

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::experiment::{reshaped_middle, GeneratedProblem};
use crate::run::solve_and_check_rep;
use crate::table::TableRow;
use scsr1::compact::{build_compact, CompactRep, PairBuffer};
use scsr1::solver::Norm;
use scsr1::spectral::factorize;

#[derive(Debug, Serialize, Deserialize)]
struct SnapshotHeader {
    n: usize,
    m: usize,
    gamma: f64,
    seed: u64,
    delta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda: Option<Vec<f64>>,
}

/// In-memory snapshot of one problem instance.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub n: usize,
    pub m: usize,
    pub gamma: f64,
    pub seed: u64,
    pub delta: f64,
    pub lambda: Option<Vec<f64>>,
    pub s_cols: Vec<Vec<f64>>,
    pub y_cols: Vec<Vec<f64>>,
    pub g: Vec<f64>,
}

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad header: {0}")]
    Header(#[from] serde_json::Error),
    #[error("malformed snapshot: {0}")]
    Malformed(String),
    #[error("problem rebuild failed: {0}")]
    Rebuild(#[from] scsr1::compact::CompactError),
    #[error("shaped spectrum has {got} values but the factorization has rank {rank}")]
    LambdaRank { got: usize, rank: usize },
}

impl Snapshot {
    pub fn of_problem(problem: &GeneratedProblem) -> Self {
        let buffer = &problem.buffer;
        let m = buffer.len();
        Snapshot {
            n: buffer.dim(),
            m,
            gamma: buffer.gamma(),
            seed: problem.seed,
            delta: problem.delta,
            lambda: Some(problem.lambda.clone()),
            s_cols: (0..m).map(|j| buffer.s_col(j).to_vec()).collect(),
            y_cols: (0..m).map(|j| buffer.y_col(j).to_vec()).collect(),
            g: problem.g.clone(),
        }
    }
}

fn write_vector(out: &mut String, v: &[f64]) {
    let mut first = true;
    for x in v {
        if !first {
            out.push(',');
        }
        first = false;
        out.push_str(&format!("{x:.16e}"));
    }
    out.push('\n');
}

pub fn write_snapshot(path: &Path, snap: &Snapshot) -> Result<(), SnapshotError> {
    let header = SnapshotHeader {
        n: snap.n,
        m: snap.m,
        gamma: snap.gamma,
        seed: snap.seed,
        delta: snap.delta,
        lambda: snap.lambda.clone(),
    };
    let mut text = serde_json::to_string(&header)?;
    text.push('\n');
    text.push_str("S\n");
    for col in &snap.s_cols {
        write_vector(&mut text, col);
    }
    text.push_str("Y\n");
    for col in &snap.y_cols {
        write_vector(&mut text, col);
    }
    text.push_str("g\n");
    write_vector(&mut text, &snap.g);
    let mut file = fs::File::create(path)?;
    file.write_all(text.as_bytes())?;
    Ok(())
}

fn parse_vector(line: &str, n: usize, what: &str) -> Result<Vec<f64>, SnapshotError> {
    let values: Result<Vec<f64>, _> = line.split(',').map(str::parse).collect();
    let values =
        values.map_err(|e| SnapshotError::Malformed(format!("{what}: bad number ({e})")))?;
    if values.len() != n {
        return Err(SnapshotError::Malformed(format!(
            "{what}: expected {n} values, got {}",
            values.len()
        )));
    }
    if !values.iter().all(|v| v.is_finite()) {
        return Err(SnapshotError::Malformed(format!("{what}: non-finite value")));
    }
    Ok(values)
}

fn expect_tag(lines: &mut std::str::Lines<'_>, tag: &str) -> Result<(), SnapshotError> {
    match lines.next() {
        Some(line) if line == tag => Ok(()),
        other => Err(SnapshotError::Malformed(format!(
            "expected `{tag}` section, found {other:?}"
        ))),
    }
}

fn next_line<'t>(lines: &mut std::str::Lines<'t>, what: &str) -> Result<&'t str, SnapshotError> {
    lines
        .next()
        .ok_or_else(|| SnapshotError::Malformed(format!("missing {what}")))
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot, SnapshotError> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header: SnapshotHeader = serde_json::from_str(next_line(&mut lines, "header")?)?;

    expect_tag(&mut lines, "S")?;
    let mut s_cols = Vec::with_capacity(header.m);
    for j in 0..header.m {
        let line = next_line(&mut lines, &format!("S column {j}"))?;
        s_cols.push(parse_vector(line, header.n, "S")?);
    }
    expect_tag(&mut lines, "Y")?;
    let mut y_cols = Vec::with_capacity(header.m);
    for j in 0..header.m {
        let line = next_line(&mut lines, &format!("Y column {j}"))?;
        y_cols.push(parse_vector(line, header.n, "Y")?);
    }
    expect_tag(&mut lines, "g")?;
    let g = parse_vector(next_line(&mut lines, "g")?, header.n, "g")?;

    Ok(Snapshot {
        n: header.n,
        m: header.m,
        gamma: header.gamma,
        seed: header.seed,
        delta: header.delta,
        lambda: header.lambda,
        s_cols,
        y_cols,
        g,
    })
}

/// Rebuild the snapshot's problem (reapplying any shaped spectrum) and
/// re-run the solve-and-verify pipeline on it.
pub fn verify_snapshot(snap: &Snapshot, norm: Norm) -> Result<TableRow, SnapshotError> {
    let buffer = PairBuffer::from_columns(snap.gamma, snap.s_cols.clone(), snap.y_cols.clone())?;
    let natural = build_compact(&buffer)?;
    let middle = match &snap.lambda {
        None => natural.middle().clone(),
        Some(lambda) => {
            let factors = factorize(&natural);
            if lambda.len() != factors.rank() {
                return Err(SnapshotError::LambdaRank {
                    got: lambda.len(),
                    rank: factors.rank(),
                });
            }
            reshaped_middle(&factors, lambda)
        }
    };
    let rep = CompactRep::with_middle(&buffer, middle);
    Ok(solve_and_check_rep(&rep, &snap.g, snap.delta, norm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::{generate, ExperimentSpec, ExperimentTag};

    #[test]
    fn snapshot_round_trip_and_verify() {
        let dir = std::env::temp_dir().join("scsr1-snapshot-test");
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("e6.snap");

        let spec = ExperimentSpec::new(ExperimentTag::E6, 40, 13);
        let problem = generate(&spec, 0).unwrap();
        let snap = Snapshot::of_problem(&problem);
        write_snapshot(&path, &snap).unwrap();
        let loaded = read_snapshot(&path).unwrap();
        assert_eq!(loaded.n, snap.n);
        assert_eq!(loaded.m, snap.m);
        assert_eq!(loaded.gamma.to_bits(), snap.gamma.to_bits());
        assert_eq!(loaded.delta.to_bits(), snap.delta.to_bits());
        assert_eq!(loaded.g, snap.g);
        assert_eq!(loaded.s_cols, snap.s_cols);
        assert_eq!(loaded.lambda, snap.lambda);

        // The reconstructed problem is the generated one: hard case, no
        // Newton iterations, residual bounds met.
        let row = verify_snapshot(&loaded, Norm::P2).unwrap();
        assert!(row.pass, "verification failed: {row:?}");
        assert_eq!(row.itns, 0);
        assert!(row.lam1_plus_sigpar.abs() <= 1e-10);

        fs::remove_file(&path).unwrap();
    }

    #[test]
    fn snapshot_without_lambda_verifies_natural_problem() {
        let dir = std::env::temp_dir().join("scsr1-snapshot-test");
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("natural.snap");

        let spec = ExperimentSpec::new(ExperimentTag::E1, 30, 21);
        let problem = generate(&spec, 0).unwrap();
        let mut snap = Snapshot::of_problem(&problem);
        snap.lambda = None;
        write_snapshot(&path, &snap).unwrap();
        let row = verify_snapshot(&read_snapshot(&path).unwrap(), Norm::P2).unwrap();
        assert!(row.error.is_none());
        assert!(row.pass);

        fs::remove_file(&path).unwrap();
    }

    #[test]
    fn malformed_snapshot_is_rejected() {
        let dir = std::env::temp_dir().join("scsr1-snapshot-test");
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("broken.snap");
        fs::write(&path, "{\"n\":2,\"m\":1,\"gamma\":1.0,\"seed\":0,\"delta\":1.0}\nS\n1.0\n").unwrap();
        assert!(matches!(
            read_snapshot(&path),
            Err(SnapshotError::Malformed(_))
        ));
        fs::remove_file(&path).unwrap();
    }
}
