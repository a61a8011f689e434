//! Extended randomized soak (not part of the default suite): run with
//! `cargo test --test soak -- --ignored --nocapture`.

use scsr1::kernels::norm2;
use scsr1::optimality::{check, check_pinf, dense_b, dense_p_par, oracle_solve_p2, quadratic_value};
use scsr1::solver::{sc_norm, solve, Norm};
use scsr1::spectral::factorize;
use scsr1_harness::experiment::{generate, ExperimentSpec, ALL_TAGS};

#[test]
#[ignore]
fn soak_oracle_and_bounds() {
    let mut worst_gap = 0.0f64;
    let mut worst_opt1 = 0.0f64;
    let mut worst_opt2 = 0.0f64;
    let mut count = 0usize;
    for i in 0..2000u64 {
        let tag = ALL_TAGS[(i % 6) as usize];
        let n = 12 + (i as usize * 11) % 39;
        let mut spec = ExperimentSpec::new(tag, n, 50_000 + i);
        spec.pairs = 3 + (i as usize) % 3;
        spec.r_target = 1 + (i as usize / 6) % 2; // r in {1, 2}
        spec.gscale = match i % 5 {
            0 => 1.0,
            1 => 1e-3,
            2 => 1e-7,
            3 => 1e-10,
            _ => 1e3,
        };
        let problem = match generate(&spec, 0) {
            Ok(p) => p,
            Err(e) => panic!("{tag} i={i}: generation failed: {e}"),
        };
        let g: Vec<f64> = problem.g.iter().map(|v| v * spec.gscale).collect();
        let rep = problem.compact();
        let factors = factorize(&rep);
        let pg = factors.project_gradient(&g);

        let sol = solve(&factors, &pg, &g, problem.delta, Norm::P2).unwrap();
        let report = check(&rep, &factors, &g, problem.delta, &sol);
        assert!(
            report.satisfies_bounds(pg.g_norm, problem.delta),
            "{tag} i={i} scale={} n={n}: opt1 {} opt2 {} itns {}",
            spec.gscale,
            report.opt1,
            report.opt2,
            sol.newton_iters
        );
        assert!(sol.newton_iters <= 10, "{tag} i={i}: {}", sol.newton_iters);
        worst_opt1 = worst_opt1.max(report.opt1 / pg.g_norm.max(1.0));
        worst_opt2 = worst_opt2.max(report.opt2 / problem.delta.max(1.0));

        let b = dense_b(&rep);
        let pp = dense_p_par(&factors);
        let (_po, q_oracle) = oracle_solve_p2(&b, &pp, &g, problem.delta);
        let q_solver = quadratic_value(&b, &g, &sol.p);
        let gap = (q_solver - q_oracle).abs() / q_oracle.abs().max(1.0);
        assert!(gap <= 1e-8, "{tag} i={i}: gap {gap:.3e}");
        worst_gap = worst_gap.max(gap);

        let sol = solve(&factors, &pg, &g, problem.delta, Norm::PInf).unwrap();
        assert!(check_pinf(&factors, &pg.g_par, problem.delta, &sol.v_par));
        assert!(sc_norm(&factors, &sol.p, Norm::PInf) <= problem.delta * (1.0 + 1e-9));
        let _ = norm2(&sol.p);
        count += 1;
    }
    println!("soak: {count} instances, worst gap {worst_gap:.2e}, worst rel opt1 {worst_opt1:.2e}, worst rel opt2 {worst_opt2:.2e}");
}
