mod common;

use common::rng;
use netcp::harness::stats::binomial_lower_tail;
use netcp::intervals::{coverage_lower_bound, covers_all, draw_intervals, recommended_m};

#[test]
fn flanking_frequency_meets_bound() {
    let (horizon, delta, m) = (60, 15, 900);
    let cps = [15, 30, 45];
    let bound = coverage_lower_bound(horizon, delta, m);
    assert!(bound > 0.5);
    let mut r = rng(41);
    let draws = 2000;
    let hits = (0..draws)
        .filter(|_| {
            covers_all(
                &draw_intervals(horizon, m, None, &mut r).unwrap().pairs,
                &cps,
                delta,
            )
        })
        .count();
    assert!(
        binomial_lower_tail(hits as u64, draws, bound) > 0.01,
        "{hits}/{draws} below {bound}"
    );
}

#[test]
fn more_intervals_cover_more_often() {
    let (horizon, delta) = (80, 20);
    let cps = [20, 40, 60];
    let rate = |m: usize, seed: u64| {
        let mut r = rng(seed);
        (0..400)
            .filter(|_| {
                covers_all(
                    &draw_intervals(horizon, m, None, &mut r).unwrap().pairs,
                    &cps,
                    delta,
                )
            })
            .count()
    };
    let few = rate(20, 1);
    let many = rate(400, 2);
    assert!(many > few, "{many} <= {few}");
    assert!(recommended_m(horizon, delta) < 400);
    assert_eq!(rate(3000, 3), 400);
}

#[test]
fn cap_bounds_every_length() {
    let mut r = rng(9);
    for cap in [1, 3, 10] {
        let set = draw_intervals(25, 500, Some(cap), &mut r).unwrap();
        assert!(set
            .pairs
            .iter()
            .all(|&(a, b)| a < b && b <= 25 && b - a <= cap));
    }
}
