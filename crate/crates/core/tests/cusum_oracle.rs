mod common;

use common::*;
use nalgebra::DMatrix;
use netcp::cusum::{
    cusum_inner_product, matrix_cusum, one_cp_population_norm, scalar_cusum, PrefixSums,
};
use netcp::matrix::SymMatrix;
use netcp::net_model::{generate_sequence, EdgeProbabilityMatrix, PiecewiseScenario};
use rand::Rng;

#[test]
fn library_matches_naive_summation() {
    let mut r = rng(101);
    for _ in 0..100 {
        let horizon = r.gen_range(2..=64);
        let n = r.gen_range(1..=10);
        let k = r.gen_range(0..=3);
        let p = random_piecewise(&mut r, horizon, n, k);
        let d = dense(&p.snapshots);
        let prefix = PrefixSums::new(&p.snapshots);
        let s = r.gen_range(0..horizon - 1);
        let e = r.gen_range(s + 2..=horizon);
        let t = r.gen_range(s + 1..e);
        let want = naive_cusum(&d, s, t, e);
        let got = matrix_cusum(&p.snapshots, s, t, e).unwrap().to_dense();
        let fast = prefix
            .cusum(netcp::cusum::CusumTriple::new(s, t, e, horizon).unwrap())
            .unwrap()
            .to_dense();
        // windows without a change have an exactly zero CUSUM, so the error
        // is measured against the size of the summands there
        let scale = frob(&want).max(frob(&d[t - 1]));
        assert!(frob(&(&got - &want)) / scale < 1e-9);
        assert!(
            frob(&(&fast - &want)) / scale < 1e-9,
            "prefix route off by {:e} at |cusum| {:e}",
            frob(&(&fast - &want)),
            frob(&want)
        );
    }
}

#[test]
fn hand_evaluated_examples() {
    let ones = SymMatrix::constant(3, 1.0);
    let seq = vec![ones.clone(), SymMatrix::zeros(3)];
    let c = matrix_cusum(&seq, 0, 1, 2).unwrap();
    for (i, j) in [(0, 0), (0, 2), (1, 2)] {
        assert!((c.get(i, j) - 0.5f64.sqrt()).abs() < 1e-15);
    }
    assert!((scalar_cusum(&[1.0, 0.0], 0, 1, 2).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
    assert_eq!(one_cp_population_norm(0, 4, 2, 1.0, 2).unwrap(), 1.0);
    assert!(matrix_cusum(&seq, 1, 1, 2).is_err());
}

#[test]
fn constant_sequence_has_zero_cusum() {
    let c = SymMatrix::from_fn(4, |i, j| 0.1 * (i + j) as f64);
    let seq = vec![c; 9];
    for t in 1..9 {
        assert!(matrix_cusum(&seq, 0, t, 9).unwrap().max_abs() < 1e-14);
    }
}

#[test]
fn one_change_closed_form_matches_full_curve() {
    let mut r = rng(7);
    let p = random_piecewise(&mut r, 30, 5, 1);
    let eta = p.change_points[0];
    let kappa = p.snapshots[eta].sub(&p.snapshots[eta - 1]).frobenius();
    for t in 1..30 {
        let got = matrix_cusum(&p.snapshots, 0, t, 30).unwrap().frobenius_sq();
        let want = one_cp_population_norm(0, 30, eta, kappa, t).unwrap();
        assert!((got - want).abs() < 1e-10 * want.max(1.0));
    }
}

#[test]
fn inner_product_with_itself_is_squared_norm() {
    let a = EdgeProbabilityMatrix::constant(6, 0.2).unwrap();
    let b = EdgeProbabilityMatrix::constant(6, 0.7).unwrap();
    let sc = PiecewiseScenario::from_thetas(20, vec![8], vec![a, b], true).unwrap();
    let seq = generate_sequence(&sc, &mut rng(3));
    let zero = generate_sequence(
        &PiecewiseScenario::from_thetas(
            20,
            vec![],
            vec![EdgeProbabilityMatrix::constant(6, 0.0).unwrap()],
            true,
        )
        .unwrap(),
        &mut rng(4),
    );
    for t in 1..20 {
        let ip = cusum_inner_product(&seq, &seq, 0, t, 20).unwrap();
        let brute: f64 = {
            let d: Vec<DMatrix<f64>> = seq
                .snapshots()
                .iter()
                .map(|x| x.to_sym().to_dense())
                .collect();
            frob(&naive_cusum(&d, 0, t, 20)).powi(2)
        };
        assert!((ip - brute).abs() < 1e-9 * brute.max(1.0));
        assert_eq!(cusum_inner_product(&seq, &zero, 0, t, 20).unwrap(), 0.0);
    }
}

#[test]
fn independent_null_samples_average_to_zero() {
    let theta = EdgeProbabilityMatrix::constant(8, 0.3).unwrap();
    let sc = PiecewiseScenario::from_thetas(30, vec![], vec![theta], true).unwrap();
    let mut r = rng(99);
    let reps = 400;
    let values: Vec<f64> = (0..reps)
        .map(|_| {
            let a = generate_sequence(&sc, &mut r);
            let b = generate_sequence(&sc, &mut r);
            cusum_inner_product(&a, &b, 0, 15, 30).unwrap()
        })
        .collect();
    let mean = values.iter().sum::<f64>() / reps as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
    let se = (var / reps as f64).sqrt();
    assert!(mean.abs() < 4.0 * se, "mean {mean}, se {se}");
}

#[test]
fn population_argmax_is_a_change_point() {
    let mut r = rng(2024);
    for _ in 0..100 {
        let horizon = r.gen_range(4..=64);
        let n = r.gen_range(1..=10);
        let k = r.gen_range(1..=4);
        let p = random_piecewise(&mut r, horizon, n, k);
        check_population_argmax(&p).unwrap();
    }
}
