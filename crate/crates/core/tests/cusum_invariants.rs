mod common;

use common::*;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn translation_invariance((seed, p) in piecewise_strategy()) {
        check_translation(seed, &p).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn boundary_scaling_before_first_change((seed, p) in piecewise_strategy()) {
        check_boundary_scaling(seed, &p).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn one_change_closed_form((seed, p) in piecewise_strategy()) {
        check_one_change(seed, &p).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn unimodal_per_segment((seed, p) in piecewise_strategy()) {
        check_unimodal(seed, &p).map_err(TestCaseError::fail)?;
    }
}
