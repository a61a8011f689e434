//! Implicit eigendecomposition of the compact representation.
//!
//! `B = γI + Ψ M Ψᵀ` factors as `B = γI + P∥ Λ̂ P∥ᵀ` with
//! `P∥ = Ψ R⁻¹ U`, where `RᵀR = ΨᵀΨ` and `R M Rᵀ = U Λ̂ Uᵀ`. All products
//! with `P∥` go through the stored columns; no n×n matrix and no basis of
//! the orthogonal complement is ever formed. `R` comes from a Cholesky of
//! the Gram matrix `ΨᵀΨ` (assembled from the cached small matrices), which
//! matches the thin-QR factor up to row signs that `U` absorbs.

use crate::compact::CompactRep;
use crate::kernels::{
    cholesky, dot, norm2, solve_upper, solve_upper_transposed, sym_eig, KernelError, SmallMatrix,
    SmallSymMatrix,
};

/// Two eigenvalues belong to the same cluster when they differ by at most
/// this tolerance (relative to `max(1, |λ₁|)`). Drives the multiplicity
/// count `r` and the zero/negative case splits downstream.
pub const CLUSTER_TOLERANCE: f64 = 1e-10;

/// Eigenfactors of `B`: eigenvalues `λ₁ ≤ … ≤ λ_{m'}` on the stored
/// subspace plus `γ` with multiplicity `n − m'` on its complement.
///
/// Columns of `Ψ` that fail the Cholesky rank test are pruned and their
/// contribution folded into the middle matrix, so the represented `B` is
/// unchanged; `kept_columns` records the surviving column indices.
#[derive(Debug, Clone)]
pub struct SpectralFactors<'a> {
    rep: &'a CompactRep<'a>,
    r: SmallMatrix,
    u: SmallMatrix,
    lambda: Vec<f64>,
    kept: Vec<usize>,
    r_mult: usize,
}

/// Gradient split against the factors' subspace: the explicit projection
/// `g∥ = P∥ᵀг` and the norm of the complementary part, recovered from
/// orthogonality as `‖g⊥‖ = √(‖g‖² − ‖g∥‖²)`.
#[derive(Debug, Clone)]
pub struct ProjectedGradient {
    pub g_par: Vec<f64>,
    pub g_perp_norm: f64,
    pub g_norm: f64,
}

fn psi_gram(rep: &CompactRep<'_>, kept: &[usize]) -> SmallSymMatrix {
    let buffer = rep.buffer();
    let g = rep.gamma();
    SmallSymMatrix::from_fn(kept.len(), |a, b| {
        let (i, j) = (kept[a], kept[b]);
        buffer.yty().get(i, j) - g * (buffer.sty().get(i, j) + buffer.sty().get(j, i))
            + g * g * buffer.sts().get(i, j)
    })
}

/// Fold position `j` of the middle matrix onto the remaining positions,
/// given the coefficients `c` expressing the dropped Ψ column over the
/// columns left of it. Leaves the represented `Ψ M Ψᵀ` unchanged.
fn fold_out_column(mid: &SmallSymMatrix, j: usize, c: &[f64]) -> SmallSymMatrix {
    let len = mid.order();
    debug_assert_eq!(c.len(), j);
    let old = |x: usize| if x < j { x } else { x + 1 };
    let coef = |x: usize| if x < j { c[x] } else { 0.0 };
    SmallSymMatrix::from_fn(len - 1, |x, y| {
        let (a, b) = (old(x), old(y));
        mid.get(a, b)
            + coef(x) * mid.get(j, b)
            + mid.get(a, j) * coef(y)
            + coef(x) * coef(y) * mid.get(j, j)
    })
}

/// Factor the compact representation into [`SpectralFactors`]. Costs
/// O(m³) on the cached Gram matrices; rank-deficient Ψ columns are pruned
/// rather than reported.
pub fn factorize<'a>(rep: &'a CompactRep<'a>) -> SpectralFactors<'a> {
    let mut kept: Vec<usize> = (0..rep.pairs()).collect();
    let mut mid = rep.middle().clone();

    let r = loop {
        if kept.is_empty() {
            break SmallMatrix::zeros(0, 0);
        }
        let gram = psi_gram(rep, &kept);
        match cholesky(&gram) {
            Ok(r) => break r,
            Err(KernelError::RankDeficient { pivot }) => {
                let c = if pivot == 0 {
                    Vec::new()
                } else {
                    // The leading block factored cleanly before the failed
                    // pivot; redo it to express the dropped column.
                    let lead = SmallSymMatrix::from_fn(pivot, |a, b| gram.get(a, b));
                    let r_lead = cholesky(&lead).expect("leading block is positive definite");
                    let col: Vec<f64> = (0..pivot).map(|a| gram.get(a, pivot)).collect();
                    let half = solve_upper_transposed(&r_lead, &col);
                    solve_upper(&r_lead, &half)
                };
                mid = fold_out_column(&mid, pivot, &c);
                kept.remove(pivot);
            }
            Err(e) => panic!("Gram factorization failed: {e}"),
        }
    };

    let rank = kept.len();
    let (lambda, u) = if rank == 0 {
        (Vec::new(), SmallMatrix::zeros(0, 0))
    } else {
        let rm = r.mul(&mid.to_matrix()).mul(&r.transpose());
        let eig = sym_eig(&SmallSymMatrix::from_near_symmetric(&rm))
            .expect("small eigendecomposition of finite matrix");
        let gamma = rep.gamma();
        let lambda: Vec<f64> = eig.values.iter().map(|v| v + gamma).collect();
        (lambda, eig.vectors)
    };

    let r_mult = cluster_size(&lambda);
    SpectralFactors {
        rep,
        r,
        u,
        lambda,
        kept,
        r_mult,
    }
}

/// Number of leading eigenvalues within the cluster tolerance of λ₁.
pub fn cluster_size(lambda: &[f64]) -> usize {
    match lambda.first() {
        None => 0,
        Some(&l1) => lambda
            .iter()
            .take_while(|&&l| l - l1 <= CLUSTER_TOLERANCE * l1.abs().max(1.0))
            .count(),
    }
}

impl<'a> SpectralFactors<'a> {
    #[inline]
    pub fn rep(&self) -> &'a CompactRep<'a> {
        self.rep
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.rep.dim()
    }

    /// Number of explicitly represented eigenpairs, `m'`.
    #[inline]
    pub fn rank(&self) -> usize {
        self.kept.len()
    }

    #[inline]
    pub fn gamma(&self) -> f64 {
        self.rep.gamma()
    }

    /// Eigenvalues on the stored subspace, ascending.
    #[inline]
    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    /// Multiplicity of λ₁ under the cluster tolerance.
    #[inline]
    pub fn r_mult(&self) -> usize {
        self.r_mult
    }

    #[inline]
    pub fn kept_columns(&self) -> &[usize] {
        &self.kept
    }

    pub fn r_factor(&self) -> &SmallMatrix {
        &self.r
    }

    pub fn u_factor(&self) -> &SmallMatrix {
        &self.u
    }

    /// `Ψᵀ x` over the kept columns.
    fn psi_tmv_kept(&self, x: &[f64]) -> Vec<f64> {
        let buffer = self.rep.buffer();
        let g = self.gamma();
        self.kept
            .iter()
            .map(|&j| dot(buffer.y_col(j), x) - g * dot(buffer.s_col(j), x))
            .collect()
    }

    /// `Ψ z` over the kept columns.
    fn psi_mv_kept(&self, z: &[f64]) -> Vec<f64> {
        let buffer = self.rep.buffer();
        let g = self.gamma();
        let mut out = vec![0.0; self.dim()];
        for (&j, &zj) in self.kept.iter().zip(z) {
            let (s, y) = (buffer.s_col(j), buffer.y_col(j));
            for i in 0..out.len() {
                out[i] += zj * (y[i] - g * s[i]);
            }
        }
        out
    }

    /// `P∥ᵀ x = Uᵀ R⁻ᵀ Ψᵀ x`.
    pub fn pll_tmv(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim());
        let t = self.psi_tmv_kept(x);
        let w = solve_upper_transposed(&self.r, &t);
        self.u.tr_matvec(&w)
    }

    /// `P∥ v = Ψ R⁻¹ U v`, the adjoint of [`Self::pll_tmv`].
    pub fn pll_mv(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.rank());
        let w = self.u.matvec(v);
        let z = solve_upper(&self.r, &w);
        self.psi_mv_kept(&z)
    }

    /// `P∥ᵀ eᵢ` without materializing the coordinate vector: row `i` of
    /// `Ψ` is read straight off the stored columns.
    pub fn pll_tmv_coord(&self, i: usize) -> Vec<f64> {
        assert!(i < self.dim());
        let buffer = self.rep.buffer();
        let g = self.gamma();
        let t: Vec<f64> = self
            .kept
            .iter()
            .map(|&j| buffer.y_col(j)[i] - g * buffer.s_col(j)[i])
            .collect();
        let w = solve_upper_transposed(&self.r, &t);
        self.u.tr_matvec(&w)
    }

    /// Split `g` into its `P∥` coordinates and the norm of the remainder.
    pub fn project_gradient(&self, g: &[f64]) -> ProjectedGradient {
        let g_par = self.pll_tmv(g);
        let g_norm = norm2(g);
        let par_sq = dot(&g_par, &g_par);
        let g_perp_norm = (g_norm * g_norm - par_sq).max(0.0).sqrt();
        ProjectedGradient {
            g_par,
            g_perp_norm,
            g_norm,
        }
    }

    /// `‖P⊥ᵀ eᵢ‖ = √(1 − ‖P∥ᵀ eᵢ‖²)`, by orthogonality of the full basis.
    pub fn eperp_norm(&self, i: usize) -> f64 {
        // U is orthogonal, so the norm of R⁻ᵀ Ψᵀ eᵢ already equals ‖P∥ᵀeᵢ‖.
        assert!(i < self.dim());
        let buffer = self.rep.buffer();
        let g = self.gamma();
        let t: Vec<f64> = self
            .kept
            .iter()
            .map(|&j| buffer.y_col(j)[i] - g * buffer.s_col(j)[i])
            .collect();
        let w = solve_upper_transposed(&self.r, &t);
        (1.0 - dot(&w, &w)).max(0.0).sqrt()
    }
}
