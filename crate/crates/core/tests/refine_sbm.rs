mod common;

use common::rng;
use netcp::cusum::{scalar_cusum, CusumTriple, PrefixSums};
use netcp::harness::{
    run_sweep, Axis, CellSpec, Family, NbsSettings, Pipeline, Scaling, SweepGrid, TrialConfig,
};
use netcp::net_model::{generate_sequence, EdgeProbabilityMatrix, PiecewiseScenario};
use netcp::refine::{local_refine, projected_profile, RefineConfig};
use proptest::prelude::*;
use rand::Rng;

// frozen once against the two cells below
const C2: f64 = 1.0;

#[test]
fn sbm_refinement_meets_rate() {
    let base = CellSpec {
        family: Family::SbmSwap,
        n: 60,
        horizon: 120,
        spacing: 60,
        k: 1,
        rho: 0.3,
        kappa0: 0.15,
        r: 2,
        m: None,
        tau1_mult: 0.3,
        self_loops: true,
    };
    let mut trial = TrialConfig::new(Pipeline::NbsRefine, NbsSettings::default());
    trial.refine.c = 2.15;
    trial.refine.c_eps = 0.1;
    let grid = SweepGrid {
        base,
        axes: vec![Axis::Kappa0(vec![0.1, 0.15])],
        scaling: Scaling::Fixed,
        reps: 200,
        base_seed: 14,
        trial,
    };
    let out = run_sweep(&grid).unwrap();
    let log_t = 120f64.ln();
    for c in &out.cells {
        let bound = C2 * log_t * log_t / c.rate_coordinate;
        let refined = c.median_error.expect("finite errors");
        let prelim = c.median_prelim_error.expect("finite errors");
        assert!(refined <= prelim, "cell {}: {refined} > {prelim}", c.cell);
        assert!(refined <= bound, "cell {}: {refined} > {bound}", c.cell);
        assert!(c.mean_error_matched <= c.mean_prelim_error_matched);
    }
}

fn random_instance(
    seed: u64,
) -> (
    netcp::net_model::NetworkSequence,
    netcp::net_model::NetworkSequence,
    usize,
) {
    let mut r = rng(seed);
    let n = r.gen_range(2..8);
    let horizon = r.gen_range(8..50);
    let eta = r.gen_range(2..horizon - 1);
    let thetas = (0..2)
        .map(|_| EdgeProbabilityMatrix::constant(n, r.gen_range(0.05..0.95)).unwrap())
        .collect();
    let sc = PiecewiseScenario::from_thetas(horizon, vec![eta], thetas, true).unwrap();
    (
        generate_sequence(&sc, &mut r),
        generate_sequence(&sc, &mut r),
        eta,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn projection_is_scalar_cusum_of_projected_series(seed in any::<u64>()) {
        let (a, b, _) = random_instance(seed);
        let horizon = a.len();
        let (pa, pb) = (PrefixSums::new(&a), PrefixSums::new(&b));
        let mut r = rng(seed ^ 1);
        let s = r.gen_range(0..horizon - 2);
        let e = r.gen_range(s + 2..=horizon);
        let t0 = r.gen_range(s + 1..e);
        let w = pb.cusum(CusumTriple::new(s, t0, e, horizon).unwrap()).unwrap();
        let norm = w.frobenius();
        prop_assume!(norm > 0.0);
        let unit = w.scale(1.0 / norm);
        let series: Vec<f64> = a.snapshots().iter().map(|x| x.to_sym().inner(&unit)).collect();
        let profile = projected_profile(&pa, &w, s, e);
        for (i, got) in profile.iter().enumerate() {
            let want = norm * scalar_cusum(&series, s, s + 1 + i, e).unwrap();
            prop_assert!((got - want).abs() <= 1e-8 * (1.0 + want.abs()));
        }
    }

    #[test]
    fn refined_points_stay_in_their_windows(seed in any::<u64>(), shift in 0usize..5) {
        let (a, b, eta) = random_instance(seed);
        let horizon = a.len();
        let nu = (eta + shift).clamp(1, horizon - 1);
        let res = local_refine(&a, &b, &[nu], &RefineConfig::new(0.5, 0.1, 1.0).unwrap());
        if let Ok(res) = res {
            let est = &res.estimates[0];
            prop_assert!(est.s <= est.estimate && est.estimate <= est.e);
            prop_assert!(est.estimate > 0 && est.estimate < horizon);
        }
    }
}
