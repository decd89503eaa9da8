mod common;

use common::*;
use nalgebra::DMatrix;
use netcp::cusum::matrix_cusum;
use netcp::matrix::SymMatrix;
use netcp::net_model::{generate_sequence, EdgeProbabilityMatrix, PiecewiseScenario};
use netcp::svt::{operator_norm, usvt, usvt_dense, usvt_error_bound_min, UsvtParams};
use rand::Rng;

#[test]
fn matches_jacobi_oracle_on_random_matrices() {
    let mut r = rng(31);
    for case in 0..100 {
        let n = r.gen_range(6..=20);
        let a = random_symmetric_dense(&mut r, n);
        let (vals, _) = jacobi_eigen(&a);
        let mags = sorted_abs(&vals);
        let keep = r.gen_range(0..n);
        let tau2 = if keep == 0 {
            mags[0] + 0.1
        } else {
            0.5 * (mags[keep - 1] + mags[keep])
        };
        let tau3 = if case % 3 == 0 {
            f64::INFINITY
        } else {
            r.gen_range(0.05..0.5)
        };
        let got = usvt_dense(&a, UsvtParams::new(tau2, tau3).unwrap()).unwrap();
        let want = oracle_usvt(&a, tau2, tau3);
        assert!(
            frob(&(&got - &want)) < 1e-8,
            "case {case}: n={n}, keep={keep}"
        );
    }
}

#[test]
fn fixed_points_are_kept() {
    let mut r = rng(8);
    let u = DMatrix::from_fn(7, 2, |_, _| r.gen_range(-0.5..0.5));
    let a = &u * u.transpose();
    let sym = SymMatrix::from_dense(&a, 1e-12).unwrap();
    let out = usvt(&sym, UsvtParams::new(1e-6, 10.0).unwrap()).unwrap();
    assert!(out.sub(&sym).frobenius() < 1e-8);
    assert!(out.max_abs() <= 10.0);
}

#[test]
fn error_bound_holds_on_qualifying_instances() {
    let mut r = rng(77);
    for case in 0..100 {
        let (a, b, tau2) = bound_instance(&mut r);
        let est = usvt_dense(&a, UsvtParams::new(tau2, f64::INFINITY).unwrap()).unwrap();
        let err = frob(&(&est - &b)).powi(2);
        let (eigs_b, _) = jacobi_eigen(&b);
        let bound = usvt_error_bound_min(tau2, &eigs_b);
        assert!(err <= bound, "case {case}: error {err} above bound {bound}");
    }
}

#[test]
fn centered_cusum_concentrates() {
    // scaled-down constants: C = 2, C_eps = 1
    let (n, rho, horizon) = (100, 0.3, 20);
    let theta = EdgeProbabilityMatrix::constant(n, rho).unwrap();
    let sc = PiecewiseScenario::from_thetas(horizon, vec![], vec![theta], true).unwrap();
    let limit = 2.0 * (n as f64 * rho).sqrt() + (horizon as f64).ln();
    let mut r = rng(5);
    let reps = 200;
    let mut within = 0;
    for _ in 0..reps {
        let seq = generate_sequence(&sc, &mut r);
        // the population CUSUM of a constant sequence is zero
        let c = matrix_cusum(&seq, 0, horizon / 2, horizon).unwrap();
        if operator_norm(&c).unwrap() <= limit {
            within += 1;
        }
    }
    assert!(within as f64 >= 0.95 * reps as f64, "{within}/{reps}");
}
