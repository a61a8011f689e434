//! High-accuracy solver for limited-memory SR1 trust-region subproblems
//! under the two shape-changing norms, including the hard case.
//!
//! The pipeline mirrors how a trust-region method would use it:
//!
//! 1. [`compact::PairBuffer`] stores the quasi-Newton pairs and Gram
//!    matrices; [`compact::build_compact`] forms `B = γI + Ψ M Ψᵀ`.
//! 2. [`spectral::factorize`] turns the representation into eigenvalues
//!    and an implicit orthonormal basis of the stored subspace.
//! 3. [`solver::solve`] minimizes the quadratic model over the
//!    shape-changing trust region and assembles the step.
//! 4. [`optimality::check`] evaluates the global-optimality residuals.
//!
//! Everything scales as O(mn) in the problem dimension for m stored
//! pairs; no n×n matrix is ever formed outside the dense test oracles.

pub mod compact;
pub mod kernels;
pub mod optimality;
pub mod solver;
pub mod spectral;

pub use compact::{build_compact, CompactRep, PairBuffer, PushOutcome, RejectReason};
pub use optimality::{check, check_pinf, oracle_solve_p2, OptimalityReport};
pub use solver::{solve, CaseTag, Norm, SubproblemSolution};
pub use spectral::{factorize, ProjectedGradient, SpectralFactors};
