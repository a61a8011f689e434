//! Trust-region subproblem solver for the two shape-changing norms.
//!
//! In the eigenbasis of `B` the subproblem decouples into a small problem
//! on the stored subspace (coordinates `v∥`, eigenvalues `λ`) and a
//! closed-form problem on its complement (curvature `γ`). The `(P,∞)`
//! branch solves `m'` independent scalar quadratics; the `(P,2)` branch
//! dispatches on the sign of λ₁, running Newton on the secular equation
//! when the boundary multiplier has no closed form and taking the
//! eigenvector step in the hard case. The full step is assembled without
//! ever forming a basis of the complement.

use thiserror::Error;

use crate::spectral::{ProjectedGradient, SpectralFactors, CLUSTER_TOLERANCE};

/// Cap on Newton iterations for the secular equation. Monotone quadratic
/// convergence makes this unreachable; hitting it signals a bug.
pub const NEWTON_MAX_ITERS: usize = 100;

/// Components of `g∥` at or below this relative threshold count as zero
/// for the range tests of the singular and indefinite cases.
pub const RANGE_TOLERANCE: f64 = 1e-12;

/// Newton also closes the relative boundary gap `δ·|φ(σ)| ≈ ‖v‖/δ − 1`
/// below this before stopping. The classic stopping rule alone leaves a
/// gap up to `√eps·δ`, which would break the feasibility and
/// complementarity guarantees; one extra quadratic step removes it.
pub const BOUNDARY_TOLERANCE: f64 = 1e-11;

/// Newton additionally drives the complementarity estimate
/// `σ·δ²·|φ(σ)| ≈ σ·(‖v‖ − δ)` under this (relative to `max(1, δ)`);
/// large multipliers would otherwise stretch the fixed boundary-gap
/// budget past the verification bound.
pub const COMPLEMENTARITY_TOLERANCE: f64 = 1e-9;

/// First coordinate directions tried for the complement step must clear
/// this projection threshold.
const EPERP_TOLERANCE: f64 = 1e-8;

/// Norm choice for the trust-region constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Norm {
    P2,
    PInf,
}

/// Which branch produced the subspace solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseTag {
    /// Unconstrained minimizer feasible, σ∥ = 0.
    Interior,
    /// Boundary solution through the secular equation.
    BoundaryNewton,
    /// Singular λ₁ = 0 with the pseudo-inverse step feasible, σ∥ = 0.
    SingularZero,
    /// λ₁ < 0 with the gradient orthogonal to its eigenspace and the
    /// shifted step interior: eigenvector step added, σ∥ = −λ₁.
    HardCase,
    /// Componentwise `(P,∞)` solution.
    PinfComponentwise,
}

/// Shape of the complement step `w*`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PerpStep {
    /// `w = −g/γ` (positive curvature, interior).
    ScaleByInvGamma,
    /// `w = (δ/‖P⊥ᵀeᵢ‖) eᵢ`: any unit direction in the complement works
    /// because the projected gradient there vanishes.
    CoordinateDirection,
    /// `w = −(δ/‖g⊥‖) g` (boundary).
    ScaleToBoundary,
}

/// Secular-equation data: distinct eigenvalues with aggregated positive
/// weights, zero-numerator terms removed.
#[derive(Debug, Clone)]
pub struct SecularSpectrum {
    pub lam_bar: Vec<f64>,
    pub a_bar: Vec<f64>,
}

impl SecularSpectrum {
    #[inline]
    pub fn ell(&self) -> usize {
        self.lam_bar.len()
    }
}

/// Solution of the trust-region subproblem.
#[derive(Debug, Clone)]
pub struct SubproblemSolution {
    pub p: Vec<f64>,
    pub sigma_par: f64,
    pub sigma_perp: f64,
    pub v_par: Vec<f64>,
    pub case_tag: CaseTag,
    pub newton_iters: usize,
    /// Hard-case step length along the λ₁ eigendirection; 0 otherwise.
    pub alpha: f64,
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("trust-region radius must be positive, got {0}")]
    InvalidRadius(f64),
    #[error("secular Newton failed to converge (sigma = {sigma}, iters = {iters})")]
    NewtonStalled { sigma: f64, iters: usize },
}

/// Solve the subproblem for `g` with radius `delta` under the chosen
/// norm, returning the assembled step and multipliers. `pg` must be the
/// projection of the same `g` against `factors`.
pub fn solve(
    factors: &SpectralFactors<'_>,
    pg: &ProjectedGradient,
    g: &[f64],
    delta: f64,
    norm: Norm,
) -> Result<SubproblemSolution, SolverError> {
    if !delta.is_finite() || delta <= 0.0 {
        return Err(SolverError::InvalidRadius(delta));
    }
    assert_eq!(g.len(), factors.dim());
    assert_eq!(pg.g_par.len(), factors.rank());

    let (v_par, sigma_par, case_tag, newton_iters, alpha) = match norm {
        Norm::P2 => solve_vpar_p2(factors.lambda(), &pg.g_par, delta, factors.r_mult())?,
        Norm::PInf => (
            solve_vpar_pinf(factors.lambda(), &pg.g_par, delta),
            0.0,
            CaseTag::PinfComponentwise,
            0,
            0.0,
        ),
    };

    // ‖g⊥‖ from orthogonality has a cancellation floor near √eps·‖g‖.
    // Below it, materialize the complement component directly with a
    // re-projection pass (O(mn), degenerate inputs only): the branch
    // split between a zero and a merely small perpendicular gradient
    // stays sound, and the boundary step can be built from the clean
    // residual instead of scaling the full gradient by a huge factor.
    let mut materialized_perp: Option<Vec<f64>> = None;
    let g_perp = if pg.g_perp_norm <= 1e-7 * pg.g_norm {
        let mut residual: Vec<f64> = {
            let projected = factors.pll_mv(&pg.g_par);
            g.iter().zip(&projected).map(|(gi, pi)| gi - pi).collect()
        };
        let back = factors.pll_mv(&factors.pll_tmv(&residual));
        for (ri, bi) in residual.iter_mut().zip(&back) {
            *ri -= bi;
        }
        let direct = self::norm(&residual);
        if direct <= 1e-10 * pg.g_norm {
            0.0
        } else {
            materialized_perp = Some(residual);
            direct
        }
    } else {
        pg.g_perp_norm
    };
    let (w_case, sigma_perp) = solve_vperp(factors.gamma(), g_perp, delta);

    let p = match (w_case, materialized_perp) {
        (PerpStep::ScaleToBoundary, Some(residual)) => {
            let mut p = factors.pll_mv(&v_par);
            let coef = -delta / g_perp;
            for (pi, ri) in p.iter_mut().zip(&residual) {
                *pi += coef * ri;
            }
            p
        }
        _ => {
            let refined = ProjectedGradient {
                g_par: pg.g_par.clone(),
                g_perp_norm: g_perp,
                g_norm: pg.g_norm,
            };
            assemble_p(factors, &v_par, w_case, g, &refined, delta)
        }
    };

    Ok(SubproblemSolution {
        p,
        sigma_par,
        sigma_perp,
        v_par,
        case_tag,
        newton_iters,
        alpha,
    })
}

/// Closed-form solution of the complement subproblem: which multiple of
/// `g` (or which coordinate direction) realizes `v⊥*`, and the multiplier
/// `σ⊥*`. Both follow directly from the optimality conditions.
pub fn solve_vperp(gamma: f64, g_perp_norm: f64, delta: f64) -> (PerpStep, f64) {
    let step = if gamma > 0.0 && g_perp_norm <= delta * gamma.abs() {
        PerpStep::ScaleByInvGamma
    } else if gamma <= 0.0 && g_perp_norm == 0.0 {
        PerpStep::CoordinateDirection
    } else {
        PerpStep::ScaleToBoundary
    };
    let sigma = if gamma >= 0.0 && g_perp_norm <= delta * gamma.abs() {
        0.0
    } else {
        (g_perp_norm / delta - gamma).max(0.0)
    };
    (step, sigma)
}

/// Componentwise `(P,∞)` solution: each coordinate minimizes its own
/// scalar quadratic over `[−δ, δ]`. Free choices are pinned to `0` for
/// the flat branch and `+δ` for the symmetric negative branch.
pub fn solve_vpar_pinf(lambda: &[f64], g_par: &[f64], delta: f64) -> Vec<f64> {
    assert_eq!(lambda.len(), g_par.len());
    lambda
        .iter()
        .zip(g_par)
        .map(|(&l, &gi)| {
            if l > 0.0 && (gi / l).abs() <= delta {
                -gi / l
            } else if gi == 0.0 && l == 0.0 {
                0.0
            } else if gi == 0.0 && l < 0.0 {
                delta
            } else {
                // Covers gi ≠ 0 with l = 0, the infeasible convex branch,
                // and the concave branch: all land on −sgn(gi)·δ.
                -gi.signum() * delta
            }
        })
        .collect()
}

/// `(P,2)` subspace solve. Returns `(v∥*, σ∥*, case, newton_iters, α)`.
///
/// Case split on λ₁ follows the sign within the cluster tolerance:
/// positive definite (unconstrained or secular), singular (pseudo-inverse
/// or secular), indefinite (shifted pseudo-inverse, hard case, or
/// secular).
pub fn solve_vpar_p2(
    lambda: &[f64],
    g_par: &[f64],
    delta: f64,
    r_mult: usize,
) -> Result<(Vec<f64>, f64, CaseTag, usize, f64), SolverError> {
    assert_eq!(lambda.len(), g_par.len());
    let m = lambda.len();
    if m == 0 {
        return Ok((Vec::new(), 0.0, CaseTag::Interior, 0, 0.0));
    }
    let l1 = lambda[0];
    let g_norm = norm(g_par);
    let range_tol = RANGE_TOLERANCE * g_norm;
    let cluster = r_mult.clamp(1, m);
    let in_range = g_par[..cluster].iter().all(|gi| gi.abs() <= range_tol);

    if l1 > CLUSTER_TOLERANCE {
        // Positive definite: try the unconstrained minimizer.
        let v0: Vec<f64> = lambda.iter().zip(g_par).map(|(l, gi)| -gi / l).collect();
        if norm(&v0) <= delta {
            return Ok((v0, 0.0, CaseTag::Interior, 0, 0.0));
        }
    } else if l1 >= -CLUSTER_TOLERANCE {
        // Singular λ₁ = 0.
        if in_range {
            let v0: Vec<f64> = lambda
                .iter()
                .zip(g_par)
                .map(|(&l, &gi)| if l.abs() <= CLUSTER_TOLERANCE { 0.0 } else { -gi / l })
                .collect();
            if norm(&v0) <= delta {
                return Ok((v0, 0.0, CaseTag::SingularZero, 0, 0.0));
            }
        }
    } else {
        // Indefinite λ₁ < 0.
        if in_range {
            let shift_tol = CLUSTER_TOLERANCE * l1.abs().max(1.0);
            let mut v1: Vec<f64> = lambda
                .iter()
                .zip(g_par)
                .map(|(&l, &gi)| if l - l1 <= shift_tol { 0.0 } else { -gi / (l - l1) })
                .collect();
            let v1_norm = norm(&v1);
            if v1_norm <= delta {
                let alpha = (delta * delta - v1_norm * v1_norm).max(0.0).sqrt();
                v1[0] += alpha;
                return Ok((v1, -l1, CaseTag::HardCase, 0, alpha));
            }
        }
    }

    // Boundary solution through the secular equation. The step is
    // reconstructed with the shifted denominators `(λ̄ᵢ + σ_base) + τ`
    // over the same cluster representatives the secular function
    // aggregated to: with the root close to a pole, per-component
    // eigenvalues split by factorization noise would desynchronize
    // `‖v∥‖` from the secular model.
    let spectrum = build_secular(lambda, g_par);
    let ns = newton_impl(&spectrum, delta, l1, &mut |_, _| {})?;
    let sigma = ns.sigma_base + ns.tau;
    let reps = cluster_representatives(lambda);
    let v: Vec<f64> = reps
        .iter()
        .zip(g_par)
        .map(|(&rep, &gi)| {
            let den = (rep + ns.sigma_base) + ns.tau;
            // Components dropped from the secular spectrum can sit on a
            // pole; their exact value is zero.
            if gi.abs() <= range_tol && den.abs() <= 1e-8 * rep.abs().max(1.0) {
                0.0
            } else {
                -gi / den
            }
        })
        .collect();
    Ok((v, sigma, CaseTag::BoundaryNewton, ns.iters, 0.0))
}

/// Aggregate `(λ, g∥)` into the secular spectrum: cluster equal
/// eigenvalues, combine their weights in quadrature, drop zero numerators.
pub fn build_secular(lambda: &[f64], g_par: &[f64]) -> SecularSpectrum {
    assert_eq!(lambda.len(), g_par.len());
    let g_norm = norm(g_par);
    let drop_tol = RANGE_TOLERANCE * g_norm;
    let mut lam_bar = Vec::new();
    let mut a_bar = Vec::new();
    let mut idx = 0;
    while idx < lambda.len() {
        let rep = lambda[idx];
        let tol = CLUSTER_TOLERANCE * rep.abs().max(1.0);
        let mut weight_sq = 0.0;
        while idx < lambda.len() && lambda[idx] - rep <= tol {
            weight_sq += g_par[idx] * g_par[idx];
            idx += 1;
        }
        let weight = weight_sq.sqrt();
        if weight > drop_tol {
            lam_bar.push(rep);
            a_bar.push(weight);
        }
    }
    SecularSpectrum { lam_bar, a_bar }
}

/// Per-component representative eigenvalue under the same clustering as
/// [`build_secular`].
fn cluster_representatives(lambda: &[f64]) -> Vec<f64> {
    let mut reps = Vec::with_capacity(lambda.len());
    let mut idx = 0;
    while idx < lambda.len() {
        let rep = lambda[idx];
        let tol = CLUSTER_TOLERANCE * rep.abs().max(1.0);
        while idx < lambda.len() && lambda[idx] - rep <= tol {
            reps.push(rep);
            idx += 1;
        }
    }
    reps
}

/// The secular function `φ∥(σ) = 1/‖v∥(σ)‖₂ − 1/δ`, with the pole
/// convention `φ∥(−λ̄ᵢ) = −1/δ`.
pub fn phi(sigma: f64, spectrum: &SecularSpectrum, delta: f64) -> f64 {
    if spectrum
        .lam_bar
        .iter()
        .any(|&l| l + sigma == 0.0)
    {
        return -1.0 / delta;
    }
    let sum: f64 = spectrum
        .lam_bar
        .iter()
        .zip(&spectrum.a_bar)
        .map(|(&l, &a)| {
            let d = l + sigma;
            (a / d) * (a / d)
        })
        .sum();
    1.0 / sum.sqrt() - 1.0 / delta
}

/// Newton's method on the secular equation from `σ⁰ = max(0, −λ₁)`.
///
/// From the left of the root the iterates of a monotonically increasing,
/// concave function increase strictly and converge quadratically. The
/// stopping rule is `|φ(σⁱ)| ≤ eps·|φ(σ⁰)| + √eps`, tightened by the
/// boundary-gap requirement of [`BOUNDARY_TOLERANCE`]. A start on a pole
/// is nudged right by the pole tolerance.
pub fn newton_secular(
    spectrum: &SecularSpectrum,
    delta: f64,
    lambda_min: f64,
) -> Result<(f64, usize), SolverError> {
    let ns = newton_impl(spectrum, delta, lambda_min, &mut |_, _| {})?;
    Ok((ns.sigma_base + ns.tau, ns.iters))
}

struct NewtonSolve {
    /// `max(0, −λ₁)`, the left end of the admissible interval.
    sigma_base: f64,
    /// Root offset: `σ* = sigma_base + tau`. Kept separate so nearly-hard
    /// cases (root within ~1e-8 of the base) stay fully resolved.
    tau: f64,
    iters: usize,
}

fn newton_impl(
    spectrum: &SecularSpectrum,
    delta: f64,
    lambda_min: f64,
    observe: &mut dyn FnMut(f64, f64),
) -> Result<NewtonSolve, SolverError> {
    let sigma_base = (-lambda_min).max(0.0);
    if spectrum.ell() == 0 {
        return Ok(NewtonSolve {
            sigma_base,
            tau: 0.0,
            iters: 0,
        });
    }
    // Work in τ = σ − σ_base. The shifted denominators dᵢ = λ̄ᵢ + σ_base
    // put the binding pole exactly at τ = 0, so Newton steps never
    // underflow the iterate even when the root hugs the pole.
    let d: Vec<f64> = spectrum.lam_bar.iter().map(|l| l + sigma_base).collect();
    let pole_tol = 1e-13 * spectrum.lam_bar[0].abs().max(1.0);
    let nudge = |tau: f64| -> f64 {
        let mut out = tau;
        for &di in &d {
            if (tau + di).abs() < pole_tol {
                out = out.max(-di + pole_tol);
            }
        }
        out
    };
    let eval = |tau: f64| -> (f64, f64) {
        let mut s2 = 0.0;
        let mut s3 = 0.0;
        for (&di, &a) in d.iter().zip(&spectrum.a_bar) {
            let den = di + tau;
            let t = (a / den) * (a / den);
            s2 += t;
            s3 += t / den;
        }
        (1.0 / s2.sqrt() - 1.0 / delta, s3 / (s2 * s2.sqrt()))
    };

    let mut tau = nudge(0.0);
    let (phi0, _) = eval(tau);
    let threshold = f64::EPSILON * phi0.abs() + f64::EPSILON.sqrt();
    let converged = |tau: f64, value: f64| {
        value.abs() <= threshold
            && delta * value.abs() <= BOUNDARY_TOLERANCE
            && (sigma_base + tau) * delta * delta * value.abs()
                <= COMPLEMENTARITY_TOLERANCE * delta.max(1.0)
    };
    observe(sigma_base + tau, phi0);
    if converged(tau, phi0) || phi0 >= 0.0 {
        return Ok(NewtonSolve {
            sigma_base,
            tau,
            iters: 0,
        });
    }

    for iter in 1..=NEWTON_MAX_ITERS {
        let (value, deriv) = eval(tau);
        if !deriv.is_finite() || deriv <= 0.0 {
            return Err(SolverError::NewtonStalled {
                sigma: sigma_base + tau,
                iters: iter,
            });
        }
        let next = nudge(tau - value / deriv);
        if next <= tau {
            // Progress below the floating-point resolution of τ; the
            // current iterate is as converged as it gets.
            return Ok(NewtonSolve {
                sigma_base,
                tau,
                iters: iter - 1,
            });
        }
        tau = next;
        let (value, _) = eval(tau);
        observe(sigma_base + tau, value);
        if converged(tau, value) || value >= 0.0 {
            return Ok(NewtonSolve {
                sigma_base,
                tau,
                iters: iter,
            });
        }
    }
    Err(SolverError::NewtonStalled {
        sigma: sigma_base + tau,
        iters: NEWTON_MAX_ITERS,
    })
}

/// Assemble `p* = P∥ v∥* + (I − P∥P∥ᵀ) w*` for the complement step chosen
/// by [`solve_vperp`]. `v⊥` is never materialized; `w` proportional to `g`
/// reuses the cached projection so the whole assembly costs one `P∥`
/// product plus an axpy.
pub fn assemble_p(
    factors: &SpectralFactors<'_>,
    v_par: &[f64],
    w_case: PerpStep,
    g: &[f64],
    pg: &ProjectedGradient,
    delta: f64,
) -> Vec<f64> {
    match w_case {
        PerpStep::ScaleByInvGamma => {
            combine_with_scaled_g(factors, v_par, g, &pg.g_par, -1.0 / factors.gamma())
        }
        PerpStep::ScaleToBoundary => {
            combine_with_scaled_g(factors, v_par, g, &pg.g_par, -delta / pg.g_perp_norm)
        }
        PerpStep::CoordinateDirection => {
            // First coordinate direction with a usable component in the
            // complement; guaranteed among the first m' + 2 indices.
            let limit = (factors.rank() + 2).min(factors.dim());
            let mut chosen = None;
            for i in 0..limit {
                let e = factors.eperp_norm(i);
                if e > EPERP_TOLERANCE {
                    chosen = Some((i, e));
                    break;
                }
            }
            let (i, eperp) = chosen.expect("complement has rank n - m'");
            let coef = delta / eperp;
            let t = factors.pll_tmv_coord(i);
            let adjusted: Vec<f64> = v_par
                .iter()
                .zip(&t)
                .map(|(v, ti)| v - coef * ti)
                .collect();
            let mut p = factors.pll_mv(&adjusted);
            p[i] += coef;
            p
        }
    }
}

/// `P∥(v∥ − c·g∥) + c·g`, the expanded form of `P∥v∥ + (I − P∥P∥ᵀ)(c·g)`.
fn combine_with_scaled_g(
    factors: &SpectralFactors<'_>,
    v_par: &[f64],
    g: &[f64],
    g_par: &[f64],
    coef: f64,
) -> Vec<f64> {
    let adjusted: Vec<f64> = v_par
        .iter()
        .zip(g_par)
        .map(|(v, gp)| v - coef * gp)
        .collect();
    let mut p = factors.pll_mv(&adjusted);
    for (pi, gi) in p.iter_mut().zip(g) {
        *pi += coef * gi;
    }
    p
}

/// The shape-changing norm of `p`: the parallel block measured in the
/// requested norm against the complement's two-norm, recovered from
/// orthogonality.
pub fn sc_norm(factors: &SpectralFactors<'_>, p: &[f64], which: Norm) -> f64 {
    let v_par = factors.pll_tmv(p);
    let par_sq: f64 = v_par.iter().map(|v| v * v).sum();
    let par = match which {
        Norm::P2 => par_sq.sqrt(),
        Norm::PInf => v_par.iter().fold(0.0f64, |m, v| m.max(v.abs())),
    };
    let total_sq: f64 = p.iter().map(|v| v * v).sum();
    let perp = (total_sq - par_sq).max(0.0).sqrt();
    par.max(perp)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
