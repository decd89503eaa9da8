mod common;

use common::rng;
use netcp::intervals::{draw_intervals, IntervalSet};
use netcp::matrix::SymMatrix;
use netcp::nbs::{nbs_detect, trim, NbsConfig};
use netcp::net_model::{
    generate_sequence, EdgeProbabilityMatrix, NetworkSequence, PiecewiseScenario,
};
use proptest::prelude::*;
use rand::Rng;

fn scenario(seed: u64, horizon: usize, n: usize, k: usize) -> PiecewiseScenario {
    let mut r = rng(seed);
    let mut cps: Vec<usize> = Vec::new();
    while cps.len() < k.min(horizon - 1) {
        let c = r.gen_range(1..horizon);
        if !cps.contains(&c) {
            cps.push(c);
        }
    }
    cps.sort_unstable();
    let thetas = (0..=cps.len())
        .map(|_| EdgeProbabilityMatrix::new(SymMatrix::from_fn(n, |_, _| r.gen())).unwrap())
        .collect();
    PiecewiseScenario::from_thetas(horizon, cps, thetas, true).unwrap()
}

fn samples(seed: u64, horizon: usize, n: usize, k: usize) -> (NetworkSequence, NetworkSequence) {
    let sc = scenario(seed, horizon, n, k);
    let mut r = rng(seed ^ 0xab);
    (
        generate_sequence(&sc, &mut r),
        generate_sequence(&sc, &mut r),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn estimates_are_unique_sorted_and_interior(
        seed in any::<u64>(), horizon in 4usize..60, n in 2usize..8, k in 0usize..4,
        m in 1usize..40, tau1 in 0.01f64..5.0,
    ) {
        let (a, b) = samples(seed, horizon, n, k);
        let set = draw_intervals(horizon, m, None, &mut rng(seed)).unwrap();
        let res = nbs_detect(&a, &b, 0, horizon, &NbsConfig::new(tau1, 0.05, set).unwrap()).unwrap();
        let est = res.estimates();
        prop_assert!(est.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(est.iter().all(|&t| t >= 1 && t < horizon));
        for d in &res.detections {
            prop_assert!(d.score > tau1);
            prop_assert!(d.s < d.estimate && d.estimate < d.e);
        }
    }

    #[test]
    fn raising_the_threshold_prunes(
        seed in any::<u64>(), horizon in 4usize..60, n in 2usize..8, k in 0usize..4,
        lo in 0.01f64..2.0, factor in 1.0f64..4.0,
    ) {
        let (a, b) = samples(seed, horizon, n, k);
        let set = draw_intervals(horizon, 30, None, &mut rng(seed)).unwrap();
        let low = nbs_detect(&a, &b, 0, horizon, &NbsConfig::new(lo, 0.05, set.clone()).unwrap()).unwrap();
        let high = nbs_detect(&a, &b, 0, horizon, &NbsConfig::new(lo * factor, 0.05, set).unwrap()).unwrap();
        let low = low.estimates();
        prop_assert!(high.estimates().iter().all(|t| low.contains(t)));
    }

    #[test]
    fn trimming_stays_inside(s in 0usize..500, len in 1usize..500, delta in 0.001f64..0.499) {
        let e = s + len;
        let (lo, hi) = trim(s, e, delta);
        prop_assert!(lo >= s && hi <= e);
        prop_assert!(lo as f64 >= s as f64 + delta * len as f64 - 1e-6);
        prop_assert!(hi as f64 <= e as f64 - delta * len as f64 + 1e-6);
    }
}

#[test]
fn repeated_calls_agree() {
    let (a, b) = samples(5, 50, 6, 2);
    let set = draw_intervals(50, 60, None, &mut rng(5)).unwrap();
    let cfg = NbsConfig::new(0.5, 0.05, set).unwrap();
    assert_eq!(
        nbs_detect(&a, &b, 0, 50, &cfg).unwrap(),
        nbs_detect(&a, &b, 0, 50, &cfg).unwrap()
    );
}

#[test]
fn noiseless_two_changes_with_full_interval() {
    let n = 6;
    let on = EdgeProbabilityMatrix::constant(n, 1.0).unwrap();
    let off = EdgeProbabilityMatrix::constant(n, 0.0).unwrap();
    let sc =
        PiecewiseScenario::from_thetas(60, vec![20, 40], vec![on.clone(), off, on], true).unwrap();
    let seq = generate_sequence(&sc, &mut rng(0));
    let pairs: Vec<(usize, usize)> = (0..60)
        .flat_map(|a| (a + 1..=60).map(move |b| (a, b)))
        .collect();
    let set = IntervalSet::new(60, pairs, None).unwrap();
    let res = nbs_detect(&seq, &seq, 0, 60, &NbsConfig::new(1.0, 0.05, set).unwrap()).unwrap();
    assert_eq!(res.estimates(), vec![20, 40]);
}

#[test]
fn sub_range_search_stays_in_range() {
    let (a, b) = samples(11, 40, 5, 3);
    let set = draw_intervals(40, 80, None, &mut rng(2)).unwrap();
    let res = nbs_detect(&a, &b, 10, 30, &NbsConfig::new(0.01, 0.05, set).unwrap()).unwrap();
    assert!(res.estimates().iter().all(|&t| t > 10 && t < 30));
}
