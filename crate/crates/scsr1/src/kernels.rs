//! Small dense linear-algebra kernels shared by the rest of the crate:
//! symmetric eigendecomposition (cyclic Jacobi), Cholesky with rank
//! detection, and a pivoted LDL^T solve for symmetric indefinite systems.
//!
//! Everything here targets matrices of order around the limited-memory
//! bound (typically <= 10), so the implementations favor accuracy and
//! determinism over asymptotics. The test oracles reuse these kernels at
//! orders up to a couple hundred, which cyclic Jacobi handles fine.

use thiserror::Error;

/// Relative pivot tolerance for [`cholesky`]: a pivot fails when the
/// remaining diagonal entry drops to `1e-14` times the largest diagonal
/// entry of the input, the noise floor for double-precision Gram matrices.
pub const CHOLESKY_RANK_TOLERANCE: f64 = 1e-14;

/// Errors raised by the dense kernels.
#[derive(Debug, Error)]
pub enum KernelError {
    #[error("input contains a non-finite entry")]
    NonFiniteInput,
    /// The matrix is not numerically positive definite; `pivot` is the
    /// zero-based index of the failing Cholesky pivot.
    #[error("rank deficient at pivot {pivot}")]
    RankDeficient { pivot: usize },
    #[error("matrix is singular to working tolerance")]
    Singular,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Dense square (or rectangular) matrix of small order, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SmallMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl SmallMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        SmallMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(order: usize) -> Self {
        let mut m = SmallMatrix::zeros(order, order);
        for i in 0..order {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut m = SmallMatrix::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            m.data[i * c..(i + 1) * c].copy_from_slice(row);
        }
        m
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    /// `A x`.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        let mut out = vec![0.0; self.rows];
        for (o, row) in out.iter_mut().zip(self.data.chunks_exact(self.cols.max(1))) {
            *o = dot(row, x);
        }
        out
    }

    /// `A^T x`.
    pub fn tr_matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (xi, row) in x.iter().zip(self.data.chunks_exact(self.cols.max(1))) {
            for (o, r) in out.iter_mut().zip(row) {
                *o += xi * r;
            }
        }
        out
    }

    /// `A B`.
    pub fn mul(&self, other: &SmallMatrix) -> SmallMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = SmallMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> SmallMatrix {
        let mut out = SmallMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    pub fn fro_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Symmetric square matrix of small order. Both triangles are stored and
/// every write keeps them identical, so `get(i, j) == get(j, i)` always.
#[derive(Debug, Clone, PartialEq)]
pub struct SmallSymMatrix {
    order: usize,
    data: Vec<f64>,
}

impl SmallSymMatrix {
    pub fn zeros(order: usize) -> Self {
        SmallSymMatrix {
            order,
            data: vec![0.0; order * order],
        }
    }

    pub fn identity(order: usize) -> Self {
        let mut m = SmallSymMatrix::zeros(order);
        for i in 0..order {
            m.set(i, i, 1.0);
        }
        m
    }

    /// Build from `f(i, j)` evaluated on the upper triangle and mirrored.
    pub fn from_fn(order: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = SmallSymMatrix::zeros(order);
        for i in 0..order {
            for j in i..order {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Build from explicit rows; panics if the rows are not symmetric.
    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let order = rows.len();
        let m = SmallMatrix::from_rows(rows);
        for i in 0..order {
            for j in (i + 1)..order {
                assert_eq!(m.get(i, j), m.get(j, i), "rows are not symmetric");
            }
        }
        SmallSymMatrix {
            order,
            data: m.data,
        }
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.order + j]
    }

    /// Writes both `(i, j)` and `(j, i)`.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.order + j] = v;
        self.data[j * self.order + i] = v;
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.order);
        let mut out = vec![0.0; self.order];
        for (o, row) in out.iter_mut().zip(self.data.chunks_exact(self.order.max(1))) {
            *o = dot(row, x);
        }
        out
    }

    pub fn to_matrix(&self) -> SmallMatrix {
        SmallMatrix {
            rows: self.order,
            cols: self.order,
            data: self.data.clone(),
        }
    }

    /// Symmetrize a numerically near-symmetric square matrix.
    pub fn from_near_symmetric(m: &SmallMatrix) -> Self {
        assert_eq!(m.nrows(), m.ncols());
        let order = m.nrows();
        SmallSymMatrix::from_fn(order, |i, j| 0.5 * (m.get(i, j) + m.get(j, i)))
    }

    pub fn fro_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_diag(&self) -> f64 {
        (0..self.order)
            .map(|i| self.get(i, i))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Result of [`sym_eig`]: eigenvalues ascending, eigenvectors as the
/// columns of an orthogonal matrix.
#[derive(Debug, Clone)]
pub struct SmallEigResult {
    pub values: Vec<f64>,
    pub vectors: SmallMatrix,
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Symmetric eigendecomposition by cyclic Jacobi sweeps.
///
/// Returns eigenvalues in ascending order with the matching eigenvector
/// columns. The sign of each column is fixed so its largest-magnitude
/// entry (first such entry on ties) is positive, which keeps results
/// reproducible across runs.
pub fn sym_eig(a: &SmallSymMatrix) -> Result<SmallEigResult, KernelError> {
    if !a.is_finite() {
        return Err(KernelError::NonFiniteInput);
    }
    let n = a.order();
    let mut w = a.clone();
    let mut v = SmallMatrix::identity(n);
    let fro = a.fro_norm();
    // Rotation threshold: entries at the double-precision noise floor of
    // the whole matrix are left alone.
    let stop = 1e-15 * fro;

    if n > 1 && fro > 0.0 {
        let mut converged = false;
        for _sweep in 0..60 {
            let mut rotated = false;
            for p in 0..n - 1 {
                for q in p + 1..n {
                    let apq = w.get(p, q);
                    if apq.abs() <= stop {
                        continue;
                    }
                    rotated = true;
                    let app = w.get(p, p);
                    let aqq = w.get(q, q);
                    let tau = (aqq - app) / (2.0 * apq);
                    let t = if tau >= 0.0 {
                        1.0 / (tau + (1.0 + tau * tau).sqrt())
                    } else {
                        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    w.set(p, p, app - t * apq);
                    w.set(q, q, aqq + t * apq);
                    w.set(p, q, 0.0);
                    for i in 0..n {
                        if i == p || i == q {
                            continue;
                        }
                        let aip = w.get(i, p);
                        let aiq = w.get(i, q);
                        w.set(i, p, c * aip - s * aiq);
                        w.set(i, q, s * aip + c * aiq);
                    }
                    for i in 0..n {
                        let vip = v.get(i, p);
                        let viq = v.get(i, q);
                        v.set(i, p, c * vip - s * viq);
                        v.set(i, q, s * vip + c * viq);
                    }
                }
            }
            if !rotated {
                converged = true;
                break;
            }
        }
        debug_assert!(converged, "Jacobi sweeps did not converge");
    }

    // Sort ascending, carrying eigenvector columns along.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| w.get(i, i).partial_cmp(&w.get(j, j)).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| w.get(i, i)).collect();
    let mut vectors = SmallMatrix::zeros(n, n);
    for (new_j, &old_j) in order.iter().enumerate() {
        for i in 0..n {
            vectors.set(i, new_j, v.get(i, old_j));
        }
    }

    // Sign convention: largest-magnitude entry of each column positive.
    for j in 0..n {
        let mut best = 0;
        for i in 1..n {
            if vectors.get(i, j).abs() > vectors.get(best, j).abs() {
                best = i;
            }
        }
        if n > 0 && vectors.get(best, j) < 0.0 {
            for i in 0..n {
                let x = vectors.get(i, j);
                vectors.set(i, j, -x);
            }
        }
    }

    Ok(SmallEigResult { values, vectors })
}

/// Cholesky factorization `R^T R = A` with `R` upper triangular and a
/// strictly positive diagonal.
///
/// Fails with [`KernelError::RankDeficient`] carrying the zero-based
/// pivot index as soon as a pivot falls to the rank tolerance; callers
/// use that index to prune the offending column.
pub fn cholesky(a: &SmallSymMatrix) -> Result<SmallMatrix, KernelError> {
    if !a.is_finite() {
        return Err(KernelError::NonFiniteInput);
    }
    let n = a.order();
    let max_diag = if n == 0 { 0.0 } else { a.max_diag().max(0.0) };
    let tol = CHOLESKY_RANK_TOLERANCE * max_diag;
    let mut r = SmallMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = a.get(j, j);
        for k in 0..j {
            let rkj = r.get(k, j);
            d -= rkj * rkj;
        }
        if d.is_nan() || d <= tol {
            return Err(KernelError::RankDeficient { pivot: j });
        }
        let rjj = d.sqrt();
        r.set(j, j, rjj);
        for c in j + 1..n {
            let mut s = a.get(j, c);
            for k in 0..j {
                s -= r.get(k, j) * r.get(k, c);
            }
            r.set(j, c, s / rjj);
        }
    }
    Ok(r)
}

/// Solve `R x = b` with `R` upper triangular.
pub fn solve_upper(r: &SmallMatrix, b: &[f64]) -> Vec<f64> {
    let n = r.nrows();
    assert_eq!(b.len(), n);
    let mut x = b.to_vec();
    for i in (0..n).rev() {
        for j in i + 1..n {
            x[i] -= r.get(i, j) * x[j];
        }
        x[i] /= r.get(i, i);
    }
    x
}

/// Solve `R^T x = b` with `R` upper triangular.
pub fn solve_upper_transposed(r: &SmallMatrix, b: &[f64]) -> Vec<f64> {
    let n = r.nrows();
    assert_eq!(b.len(), n);
    let mut x = b.to_vec();
    for i in 0..n {
        for j in 0..i {
            x[i] -= r.get(j, i) * x[j];
        }
        x[i] /= r.get(i, i);
    }
    x
}

enum PivotBlock {
    One(f64),
    Two { a: f64, b: f64, c: f64 },
}

/// Factored form `P A P^T = L D L^T` of a symmetric (possibly indefinite)
/// matrix, produced with Bunch–Parlett complete pivoting: 1x1 and 2x2
/// diagonal blocks in `D`, unit lower-triangular `L`.
pub struct SymIndefFactor {
    n: usize,
    lower: SmallMatrix,
    perm: Vec<usize>,
    blocks: Vec<PivotBlock>,
    block_start: Vec<usize>,
}

impl SymIndefFactor {
    pub fn factor(a: &SmallSymMatrix) -> Result<Self, KernelError> {
        if !a.is_finite() {
            return Err(KernelError::NonFiniteInput);
        }
        let n = a.order();
        let mut w = a.to_matrix();
        let mut lower = SmallMatrix::identity(n);
        let mut perm: Vec<usize> = (0..n).collect();
        let mut blocks = Vec::new();
        let mut block_start = Vec::new();

        let scale = w.data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if n > 0 && scale == 0.0 {
            return Err(KernelError::Singular);
        }
        let tol = 1e-13 * scale;
        // Bunch–Parlett threshold balancing element growth between 1x1
        // and 2x2 pivots.
        let alpha = (1.0 + 17f64.sqrt()) / 8.0;

        let swap = |w: &mut SmallMatrix,
                        lower: &mut SmallMatrix,
                        perm: &mut Vec<usize>,
                        k: usize,
                        r1: usize,
                        r2: usize| {
            if r1 == r2 {
                return;
            }
            for j in 0..n {
                let t = w.get(r1, j);
                w.set(r1, j, w.get(r2, j));
                w.set(r2, j, t);
            }
            for i in 0..n {
                let t = w.get(i, r1);
                w.set(i, r1, w.get(i, r2));
                w.set(i, r2, t);
            }
            for j in 0..k {
                let t = lower.get(r1, j);
                lower.set(r1, j, lower.get(r2, j));
                lower.set(r2, j, t);
            }
            perm.swap(r1, r2);
        };

        let mut k = 0;
        while k < n {
            // Largest remaining diagonal and off-diagonal magnitudes.
            let mut mu1 = -1.0;
            let mut p1 = k;
            for i in k..n {
                if w.get(i, i).abs() > mu1 {
                    mu1 = w.get(i, i).abs();
                    p1 = i;
                }
            }
            let mut mu0 = 0.0;
            let mut off = (k, k);
            for i in k..n {
                for j in i + 1..n {
                    if w.get(j, i).abs() > mu0 {
                        mu0 = w.get(j, i).abs();
                        off = (i, j);
                    }
                }
            }
            if mu1.max(mu0) <= tol {
                return Err(KernelError::Singular);
            }

            if mu1 >= alpha * mu0 {
                swap(&mut w, &mut lower, &mut perm, k, k, p1);
                block_start.push(k);
                let d = w.get(k, k);
                blocks.push(PivotBlock::One(d));
                let col: Vec<f64> = (k + 1..n).map(|i| w.get(i, k)).collect();
                for (idx, i) in (k + 1..n).enumerate() {
                    lower.set(i, k, col[idx] / d);
                }
                for i in k + 1..n {
                    let li = lower.get(i, k);
                    for j in k + 1..=i {
                        let upd = w.get(i, j) - li * col[j - k - 1];
                        w.set(i, j, upd);
                        w.set(j, i, upd);
                    }
                }
                k += 1;
            } else {
                // The scan keeps p < q with both in k..n, so row q is
                // untouched by the first swap and the pivot pair lands
                // in rows k, k+1.
                let (p, q) = off;
                swap(&mut w, &mut lower, &mut perm, k, k, p);
                debug_assert!(q > k);
                swap(&mut w, &mut lower, &mut perm, k, k + 1, q);
                block_start.push(k);
                let ea = w.get(k, k);
                let eb = w.get(k + 1, k);
                let ec = w.get(k + 1, k + 1);
                let det = ea * ec - eb * eb;
                if det.abs() <= tol * tol {
                    return Err(KernelError::Singular);
                }
                blocks.push(PivotBlock::Two {
                    a: ea,
                    b: eb,
                    c: ec,
                });
                let u: Vec<f64> = (k + 2..n).map(|i| w.get(i, k)).collect();
                let vv: Vec<f64> = (k + 2..n).map(|i| w.get(i, k + 1)).collect();
                for (idx, i) in (k + 2..n).enumerate() {
                    let x = (ec * u[idx] - eb * vv[idx]) / det;
                    let y = (ea * vv[idx] - eb * u[idx]) / det;
                    lower.set(i, k, x);
                    lower.set(i, k + 1, y);
                }
                for i in k + 2..n {
                    let xi = lower.get(i, k);
                    let yi = lower.get(i, k + 1);
                    for j in k + 2..=i {
                        let upd = w.get(i, j) - xi * u[j - k - 2] - yi * vv[j - k - 2];
                        w.set(i, j, upd);
                        w.set(j, i, upd);
                    }
                }
                k += 2;
            }
        }

        Ok(SymIndefFactor {
            n,
            lower,
            perm,
            blocks,
            block_start,
        })
    }

    /// Solve `A x = b` using the stored factorization.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let n = self.n;
        // Gather into permuted order.
        let mut y: Vec<f64> = (0..n).map(|i| b[self.perm[i]]).collect();
        // Forward: L y' = y.
        for i in 0..n {
            for j in 0..i {
                y[i] -= self.lower.get(i, j) * y[j];
            }
        }
        // Block diagonal solve.
        for (blk, &start) in self.blocks.iter().zip(&self.block_start) {
            match blk {
                PivotBlock::One(d) => y[start] /= d,
                PivotBlock::Two { a, b, c } => {
                    let det = a * c - b * b;
                    let (y1, y2) = (y[start], y[start + 1]);
                    y[start] = (c * y1 - b * y2) / det;
                    y[start + 1] = (a * y2 - b * y1) / det;
                }
            }
        }
        // Backward: L^T x' = y.
        for i in (0..n).rev() {
            for j in i + 1..n {
                y[i] -= self.lower.get(j, i) * y[j];
            }
        }
        // Scatter back.
        let mut x = vec![0.0; n];
        for i in 0..n {
            x[self.perm[i]] = y[i];
        }
        x
    }

    /// Dense inverse, solved column by column.
    pub fn inverse(&self) -> SmallMatrix {
        let n = self.n;
        let mut inv = SmallMatrix::zeros(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            let col = self.solve(&e);
            e[j] = 0.0;
            for (i, v) in col.iter().enumerate() {
                inv.set(i, j, *v);
            }
        }
        inv
    }
}

/// Solve a symmetric, possibly indefinite system `A x = b`.
pub fn solve_sym(a: &SmallSymMatrix, b: &[f64]) -> Result<Vec<f64>, KernelError> {
    if b.len() != a.order() {
        return Err(KernelError::DimensionMismatch {
            expected: a.order(),
            got: b.len(),
        });
    }
    if !b.iter().all(|v| v.is_finite()) {
        return Err(KernelError::NonFiniteInput);
    }
    Ok(SymIndefFactor::factor(a)?.solve(b))
}
