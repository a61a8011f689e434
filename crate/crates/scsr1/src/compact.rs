//! Limited-memory SR1 pair storage and the compact form `B = γI + Ψ M Ψᵀ`
//! with `Ψ = Y − γS`.
//!
//! `Ψ` is never materialized: products route through the stored `S` and
//! `Y` columns, and the small Gram matrices `SᵀS`, `SᵀY`, `YᵀY` are kept
//! current on every push so downstream factorizations run without any
//! O(n) work beyond the products themselves.

use thiserror::Error;

use crate::kernels::{dot, norm2, KernelError, SmallMatrix, SmallSymMatrix, SymIndefFactor};

/// Default number of stored pairs; keeps within the usual 3..7 range for
/// limited-memory methods.
pub const DEFAULT_MEMORY: usize = 5;

/// Relative threshold on `|sᵀ(y − Bs)|` below which an update is refused
/// as numerically undefined.
pub const REJECT_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum CompactError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("input contains a non-finite entry")]
    NonFiniteInput,
    #[error("zero step vector")]
    ZeroStep,
    /// The middle matrix `D + L + Lᵀ − γSᵀS` is singular to tolerance,
    /// so the compact representation does not exist for this history.
    #[error("compact representation undefined: middle matrix is singular")]
    CompactUndefined,
}

/// Outcome of a pair update attempt. Rejection is a normal result, not an
/// error: the buffer is left untouched and the caller simply skips the
/// update.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PushOutcome {
    Accepted,
    Rejected(RejectReason),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RejectReason {
    /// `|sᵀ(y − Bs)|` fell under the relative threshold, so the rank-one
    /// update is undefined.
    DegenerateUpdate,
    /// The middle matrix for the extended history is singular.
    MiddleMatrixSingular,
}

/// Stored quasi-Newton history: up to `m_max` pairs `(sᵢ, yᵢ)`, the scalar
/// `γ` of `B₀ = γI`, and the cached Gram matrices.
#[derive(Debug, Clone)]
pub struct PairBuffer {
    n: usize,
    m_max: usize,
    gamma: f64,
    s_cols: Vec<Vec<f64>>,
    y_cols: Vec<Vec<f64>>,
    sts: SmallSymMatrix,
    sty: SmallMatrix,
    yty: SmallSymMatrix,
}

impl PairBuffer {
    pub fn new(n: usize, m_max: usize, gamma: f64) -> Self {
        assert!(gamma.is_finite(), "gamma must be finite");
        PairBuffer {
            n,
            m_max,
            gamma,
            s_cols: Vec::new(),
            y_cols: Vec::new(),
            sts: SmallSymMatrix::zeros(0),
            sty: SmallMatrix::zeros(0, 0),
            yty: SmallSymMatrix::zeros(0),
        }
    }

    pub fn with_default_memory(n: usize, gamma: f64) -> Self {
        PairBuffer::new(n, DEFAULT_MEMORY, gamma)
    }

    /// Build a buffer directly from stored columns, recomputing the Gram
    /// matrices. No update-acceptance checks are applied; this is the
    /// entry point for replaying saved problems.
    pub fn from_columns(
        gamma: f64,
        s_cols: Vec<Vec<f64>>,
        y_cols: Vec<Vec<f64>>,
    ) -> Result<Self, CompactError> {
        if s_cols.len() != y_cols.len() {
            return Err(CompactError::DimensionMismatch {
                expected: s_cols.len(),
                got: y_cols.len(),
            });
        }
        if !gamma.is_finite() {
            return Err(CompactError::NonFiniteInput);
        }
        let m = s_cols.len();
        let n = s_cols.first().map_or(0, Vec::len);
        for col in s_cols.iter().chain(&y_cols) {
            if col.len() != n {
                return Err(CompactError::DimensionMismatch {
                    expected: n,
                    got: col.len(),
                });
            }
            if !col.iter().all(|v| v.is_finite()) {
                return Err(CompactError::NonFiniteInput);
            }
        }
        let mut buf = PairBuffer {
            n,
            m_max: m.max(DEFAULT_MEMORY),
            gamma,
            s_cols,
            y_cols,
            sts: SmallSymMatrix::zeros(m),
            sty: SmallMatrix::zeros(m, m),
            yty: SmallSymMatrix::zeros(m),
        };
        let (sts, sty, yty) = buf.recompute_grams();
        buf.sts = sts;
        buf.sty = sty;
        buf.yty = yty;
        Ok(buf)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.s_cols.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.s_cols.is_empty()
    }

    #[inline]
    pub fn memory_bound(&self) -> usize {
        self.m_max
    }

    #[inline]
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn s_col(&self, j: usize) -> &[f64] {
        &self.s_cols[j]
    }

    pub fn y_col(&self, j: usize) -> &[f64] {
        &self.y_cols[j]
    }

    pub fn sts(&self) -> &SmallSymMatrix {
        &self.sts
    }

    pub fn sty(&self) -> &SmallMatrix {
        &self.sty
    }

    pub fn yty(&self) -> &SmallSymMatrix {
        &self.yty
    }

    /// Recompute all three Gram matrices from the stored columns. O(m²n);
    /// kept for consistency checks, the incremental path is the normal one.
    pub fn recompute_grams(&self) -> (SmallSymMatrix, SmallMatrix, SmallSymMatrix) {
        let m = self.len();
        let sts = SmallSymMatrix::from_fn(m, |i, j| dot(&self.s_cols[i], &self.s_cols[j]));
        let yty = SmallSymMatrix::from_fn(m, |i, j| dot(&self.y_cols[i], &self.y_cols[j]));
        let mut sty = SmallMatrix::zeros(m, m);
        for i in 0..m {
            for j in 0..m {
                sty.set(i, j, dot(&self.s_cols[i], &self.y_cols[j]));
            }
        }
        (sts, sty, yty)
    }

    /// The middle matrix `D + L + Lᵀ − γSᵀS`, whose inverse is `M`.
    fn middle_from(sts: &SmallSymMatrix, sty: &SmallMatrix, gamma: f64) -> SmallSymMatrix {
        let m = sts.order();
        SmallSymMatrix::from_fn(m, |i, j| {
            // i <= j here; D + L + Lᵀ picks the lower-triangle entry of SᵀY.
            sty.get(j, i) - gamma * sts.get(i, j)
        })
    }

    fn invert_middle(middle: &SmallSymMatrix) -> Result<SmallSymMatrix, CompactError> {
        let m = middle.order();
        if m == 0 {
            return Ok(SmallSymMatrix::zeros(0));
        }
        let factor = match SymIndefFactor::factor(middle) {
            Ok(f) => f,
            Err(KernelError::Singular) => return Err(CompactError::CompactUndefined),
            Err(KernelError::NonFiniteInput) => return Err(CompactError::NonFiniteInput),
            Err(e) => panic!("unexpected factorization error: {e}"),
        };
        let inv = SmallSymMatrix::from_near_symmetric(&factor.inverse());
        // M * middle must reproduce the identity; a large residual means
        // the history is too ill-conditioned to represent.
        let prod = inv.to_matrix().mul(&middle.to_matrix());
        let mut res = 0.0f64;
        for i in 0..m {
            for j in 0..m {
                let expect = if i == j { 1.0 } else { 0.0 };
                res += (prod.get(i, j) - expect).powi(2);
            }
        }
        if res.sqrt() > 1e-10 * (m as f64).max(1.0) {
            return Err(CompactError::CompactUndefined);
        }
        Ok(inv)
    }

    /// Offer a new pair to the buffer. `b_s` must be the current `B`
    /// applied to `s` (use [`CompactRep::bmv`] on the rep built from this
    /// buffer). The oldest pair is evicted when the buffer is full.
    ///
    /// The update is rejected, leaving the buffer untouched, when
    /// `|sᵀ(y − Bs)|` is below the relative threshold or when the middle
    /// matrix for the extended history turns out singular.
    pub fn push_pair(
        &mut self,
        s: &[f64],
        y: &[f64],
        b_s: &[f64],
    ) -> Result<PushOutcome, CompactError> {
        for v in [s, y, b_s] {
            if v.len() != self.n {
                return Err(CompactError::DimensionMismatch {
                    expected: self.n,
                    got: v.len(),
                });
            }
            if !v.iter().all(|x| x.is_finite()) {
                return Err(CompactError::NonFiniteInput);
            }
        }
        let s_norm = norm2(s);
        if s_norm == 0.0 {
            return Err(CompactError::ZeroStep);
        }

        let residual: Vec<f64> = y.iter().zip(b_s).map(|(yi, bi)| yi - bi).collect();
        let denom = dot(s, &residual);
        if denom.abs() <= REJECT_TOLERANCE * s_norm * norm2(&residual) {
            return Ok(PushOutcome::Rejected(RejectReason::DegenerateUpdate));
        }

        // Candidate Gram matrices for the history after eviction+append;
        // one new row/column of dot products each, O(mn).
        let evict = self.len() == self.m_max;
        let base = usize::from(evict);
        let kept = self.len() - base;
        let m_new = kept + 1;
        let mut sts = SmallSymMatrix::zeros(m_new);
        let mut yty = SmallSymMatrix::zeros(m_new);
        let mut sty = SmallMatrix::zeros(m_new, m_new);
        for i in 0..kept {
            for j in i..kept {
                sts.set(i, j, self.sts.get(base + i, base + j));
                yty.set(i, j, self.yty.get(base + i, base + j));
            }
            for j in 0..kept {
                sty.set(i, j, self.sty.get(base + i, base + j));
            }
        }
        for i in 0..kept {
            sts.set(i, kept, dot(&self.s_cols[base + i], s));
            yty.set(i, kept, dot(&self.y_cols[base + i], y));
            sty.set(i, kept, dot(&self.s_cols[base + i], y));
            sty.set(kept, i, dot(s, &self.y_cols[base + i]));
        }
        sts.set(kept, kept, dot(s, s));
        yty.set(kept, kept, dot(y, y));
        sty.set(kept, kept, dot(s, y));

        let middle = Self::middle_from(&sts, &sty, self.gamma);
        match Self::invert_middle(&middle) {
            Ok(_) => {}
            Err(CompactError::CompactUndefined) => {
                return Ok(PushOutcome::Rejected(RejectReason::MiddleMatrixSingular));
            }
            Err(e) => return Err(e),
        }

        if evict {
            self.s_cols.remove(0);
            self.y_cols.remove(0);
        }
        self.s_cols.push(s.to_vec());
        self.y_cols.push(y.to_vec());
        self.sts = sts;
        self.sty = sty;
        self.yty = yty;
        Ok(PushOutcome::Accepted)
    }
}

/// Immutable compact representation `B = γI + Ψ M Ψᵀ` bound to the buffer
/// state it was built from. Cheap to share across threads; all products
/// are read-only.
#[derive(Debug, Clone)]
pub struct CompactRep<'a> {
    buffer: &'a PairBuffer,
    middle_inverse: SmallSymMatrix,
}

/// Build the compact representation for the buffer's current history.
/// O(m³) given the cached Gram matrices; no O(n) work.
pub fn build_compact(buffer: &PairBuffer) -> Result<CompactRep<'_>, CompactError> {
    let middle = PairBuffer::middle_from(&buffer.sts, &buffer.sty, buffer.gamma);
    let middle_inverse = PairBuffer::invert_middle(&middle)?;
    Ok(CompactRep {
        buffer,
        middle_inverse,
    })
}

impl<'a> CompactRep<'a> {
    /// Assemble a representation around a caller-supplied middle matrix
    /// `M`. Used when replaying saved problems and by generators that
    /// reshape the spectrum while keeping the stored columns.
    pub fn with_middle(buffer: &'a PairBuffer, middle_inverse: SmallSymMatrix) -> Self {
        assert_eq!(middle_inverse.order(), buffer.len());
        CompactRep {
            buffer,
            middle_inverse,
        }
    }

    #[inline]
    pub fn buffer(&self) -> &'a PairBuffer {
        self.buffer
    }

    #[inline]
    pub fn pairs(&self) -> usize {
        self.buffer.len()
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.buffer.dim()
    }

    #[inline]
    pub fn gamma(&self) -> f64 {
        self.buffer.gamma()
    }

    pub fn middle(&self) -> &SmallSymMatrix {
        &self.middle_inverse
    }

    /// `Ψᵀ x = Yᵀx − γ Sᵀx`.
    pub fn psi_tmv(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim());
        let g = self.gamma();
        (0..self.pairs())
            .map(|j| dot(self.buffer.y_col(j), x) - g * dot(self.buffer.s_col(j), x))
            .collect()
    }

    /// `Ψ z = Yz − γ Sz`.
    pub fn psi_mv(&self, z: &[f64]) -> Vec<f64> {
        assert_eq!(z.len(), self.pairs());
        let g = self.gamma();
        let mut out = vec![0.0; self.dim()];
        for (j, &zj) in z.iter().enumerate() {
            let (s, y) = (self.buffer.s_col(j), self.buffer.y_col(j));
            for i in 0..out.len() {
                out[i] += zj * (y[i] - g * s[i]);
            }
        }
        out
    }

    /// `B x = γx + Ψ(M(Ψᵀx))`, at (4m+1)n + O(m²) flops.
    pub fn bmv(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim());
        let t = self.psi_tmv(x);
        let z = self.middle_inverse.matvec(&t);
        let mut out = self.psi_mv(&z);
        let g = self.gamma();
        for (o, xi) in out.iter_mut().zip(x) {
            *o += g * xi;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    /// Dense recursive SR1 accumulation over the stored pairs, the
    /// independent oracle for the compact representation.
    pub(crate) fn recursive_sr1_dense(buffer: &PairBuffer) -> Option<Vec<Vec<f64>>> {
        let n = buffer.dim();
        let mut b: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let mut row = vec![0.0; n];
                row[i] = buffer.gamma();
                row
            })
            .collect();
        for j in 0..buffer.len() {
            let s = buffer.s_col(j);
            let y = buffer.y_col(j);
            let bs: Vec<f64> = b.iter().map(|row| dot(row, s)).collect();
            let r: Vec<f64> = y.iter().zip(&bs).map(|(yi, bi)| yi - bi).collect();
            let denom = dot(&r, s);
            if denom.abs() <= 1e-13 * norm2(&r) * norm2(s) {
                return None;
            }
            for (i, row) in b.iter_mut().enumerate() {
                for (k, cell) in row.iter_mut().enumerate() {
                    *cell += r[i] * r[k] / denom;
                }
            }
        }
        Some(b)
    }

    fn rel_err(a: &[f64], b: &[f64]) -> f64 {
        let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
        diff.sqrt() / norm2(b).max(1e-300)
    }

    #[test]
    fn push_accepts_and_represents_diag() {
        let mut buf = PairBuffer::with_default_memory(2, 1.0);
        let rep0 = build_compact(&buf).unwrap();
        let s = [1.0, 0.0];
        let b_s = rep0.bmv(&s);
        let out = buf.push_pair(&s, &[2.0, 0.0], &b_s).unwrap();
        assert_eq!(out, PushOutcome::Accepted);

        // Hand-evaluated middle matrix: SᵀY = 2, SᵀS = 1 so M = (2-1)⁻¹ = 1.
        let rep = build_compact(&buf).unwrap();
        assert!((rep.middle().get(0, 0) - 1.0).abs() <= 1e-12);

        // Resulting B is diag(2, 1) by the rank-one recursion.
        let e1 = rep.bmv(&[1.0, 0.0]);
        let e2 = rep.bmv(&[0.0, 1.0]);
        assert!((e1[0] - 2.0).abs() < 1e-14 && e1[1].abs() < 1e-14);
        assert!(e2[0].abs() < 1e-14 && (e2[1] - 1.0).abs() < 1e-14);
        let x = rep.bmv(&[1.0, 1.0]);
        assert!((x[0] - 2.0).abs() < 1e-14 && (x[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn push_rejects_degenerate_update() {
        let mut buf = PairBuffer::with_default_memory(2, 1.0);
        let rep0 = build_compact(&buf).unwrap();
        let s = [1.0, 0.0];
        let b_s = rep0.bmv(&s);
        // y = B₀ s makes the update undefined.
        let out = buf.push_pair(&s, &[1.0, 0.0], &b_s).unwrap();
        assert_eq!(
            out,
            PushOutcome::Rejected(RejectReason::DegenerateUpdate)
        );
        assert!(buf.is_empty());
    }

    #[test]
    fn push_rejects_zero_step_and_dim_mismatch() {
        let mut buf = PairBuffer::with_default_memory(2, 1.0);
        assert!(matches!(
            buf.push_pair(&[0.0, 0.0], &[1.0, 0.0], &[0.0, 0.0]),
            Err(CompactError::ZeroStep)
        ));
        assert!(matches!(
            buf.push_pair(&[1.0], &[1.0, 0.0], &[0.0, 0.0]),
            Err(CompactError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn eviction_keeps_most_recent_pairs() {
        let n = 8;
        let mut rng = StdRng::seed_from_u64(5);
        let mut buf = PairBuffer::new(n, 5, 0.5);
        let mut pushed: Vec<Vec<f64>> = Vec::new();
        while pushed.len() < 6 {
            let s: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let rep = build_compact(&buf).unwrap();
            let b_s = rep.bmv(&s);
            if buf.push_pair(&s, &y, &b_s).unwrap() == PushOutcome::Accepted {
                pushed.push(s);
            }
        }
        assert_eq!(buf.len(), 5);
        // Oldest pair evicted: stored column 0 is the second accepted s.
        assert_eq!(buf.s_col(0), pushed[1].as_slice());
        assert_eq!(buf.s_col(4), pushed[5].as_slice());
    }

    #[test]
    fn empty_buffer_is_scaled_identity() {
        let buf = PairBuffer::with_default_memory(3, 3.0);
        let rep = build_compact(&buf).unwrap();
        assert_eq!(rep.pairs(), 0);
        assert_eq!(rep.bmv(&[1.0, 0.0, 0.0]), vec![3.0, 0.0, 0.0]);
        assert_eq!(rep.psi_tmv(&[1.0, 2.0, 3.0]), Vec::<f64>::new());
        assert_eq!(rep.psi_mv(&[]), vec![0.0; 3]);
    }

    #[test]
    fn singular_middle_matrix_is_undefined() {
        // s = (1,0), y = (3,0), γ = 3: SᵀY = 3, SᵀS = 1, middle = 3 - 3·1 = 0.
        let buf =
            PairBuffer::from_columns(3.0, vec![vec![1.0, 0.0]], vec![vec![3.0, 0.0]]).unwrap();
        assert!(matches!(
            build_compact(&buf),
            Err(CompactError::CompactUndefined)
        ));
    }

    #[test]
    fn psi_products_hand_case_and_adjointness() {
        let buf =
            PairBuffer::from_columns(1.0, vec![vec![1.0, 0.0]], vec![vec![2.0, 0.0]]).unwrap();
        let rep = build_compact(&buf).unwrap();
        // Ψ = y − γs = (1, 0); Ψᵀ(5,7) = 5.
        assert_eq!(rep.psi_tmv(&[5.0, 7.0]), vec![5.0]);

        let mut rng = StdRng::seed_from_u64(9);
        for _ in 0..50 {
            let x: Vec<f64> = (0..2).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let z: Vec<f64> = vec![rng.gen_range(-2.0..2.0)];
            let lhs = dot(&rep.psi_tmv(&x), &z);
            let rhs = dot(&x, &rep.psi_mv(&z));
            assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(rhs.abs()).max(1.0));
        }
    }

    /// Drive a random history through push_pair with `B_s` supplied by the
    /// current representation, the way a trust-region loop would.
    pub(crate) fn random_history(
        rng: &mut StdRng,
        n: usize,
        m_max: usize,
        pushes: usize,
        gamma: f64,
    ) -> PairBuffer {
        let mut buf = PairBuffer::new(n, m_max, gamma);
        for _ in 0..pushes {
            let s: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let b_s = build_compact(&buf).unwrap().bmv(&s);
            let _ = buf.push_pair(&s, &y, &b_s).unwrap();
        }
        buf
    }

    #[test]
    fn bmv_matches_recursive_accumulation() {
        let mut rng = StdRng::seed_from_u64(17);
        for trial in 0..40 {
            let n = rng.gen_range(4..=50);
            let pushes = rng.gen_range(1..=7);
            let gamma = if trial % 3 == 0 {
                -rng.gen_range(0.2..2.0)
            } else {
                rng.gen_range(0.2..2.0)
            };
            let buf = random_history(&mut rng, n, 5, pushes, gamma);
            let Some(dense) = recursive_sr1_dense(&buf) else {
                continue;
            };
            let rep = build_compact(&buf).unwrap();
            for _ in 0..4 {
                let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let fast = rep.bmv(&x);
                let slow: Vec<f64> = dense.iter().map(|row| dot(row, &x)).collect();
                assert!(
                    rel_err(&fast, &slow) <= 1e-9,
                    "compact vs recursive mismatch: {}",
                    rel_err(&fast, &slow)
                );
            }
        }
    }

    #[test]
    fn gram_matrices_stay_consistent() {
        let mut rng = StdRng::seed_from_u64(29);
        let buf = random_history(&mut rng, 20, 4, 9, -0.7);
        let (sts, sty, yty) = buf.recompute_grams();
        let m = buf.len();
        for i in 0..m {
            for j in 0..m {
                let scale = sts.get(i, j).abs().max(1.0);
                assert!((buf.sts().get(i, j) - sts.get(i, j)).abs() <= 1e-12 * scale);
                let scale = sty.get(i, j).abs().max(1.0);
                assert!((buf.sty().get(i, j) - sty.get(i, j)).abs() <= 1e-12 * scale);
                let scale = yty.get(i, j).abs().max(1.0);
                assert!((buf.yty().get(i, j) - yty.get(i, j)).abs() <= 1e-12 * scale);
            }
        }
    }

    #[test]
    fn bmv_is_linear_and_symmetric() {
        let mut rng = StdRng::seed_from_u64(31);
        let n = 25;
        let buf = random_history(&mut rng, n, 5, 5, 1.3);
        let rep = build_compact(&buf).unwrap();
        for _ in 0..20 {
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let z: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let (a, b) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let combo: Vec<f64> = x.iter().zip(&z).map(|(xi, zi)| a * xi + b * zi).collect();
            let lhs = rep.bmv(&combo);
            let bx = rep.bmv(&x);
            let bz = rep.bmv(&z);
            let rhs: Vec<f64> = bx.iter().zip(&bz).map(|(u, v)| a * u + b * v).collect();
            assert!(rel_err(&lhs, &rhs) <= 1e-12);

            let sym_l = dot(&bx, &z);
            let sym_r = dot(&x, &bz);
            assert!((sym_l - sym_r).abs() <= 1e-12 * sym_l.abs().max(sym_r.abs()).max(1.0));
        }
    }
}
