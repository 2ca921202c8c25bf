mod common;

use proptest::prelude::*;
use segrl::ppo::compute_gae;

fn instance() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<bool>, f64, f64, f64)> {
    (1usize..=32).prop_flat_map(|n| {
        (
            prop::collection::vec(-2.0f64..2.0, n),
            prop::collection::vec(-5.0f64..5.0, n),
            prop::collection::vec(prop::bool::weighted(0.15), n),
            -5.0f64..5.0,
            0.5f64..=1.0,
            0.0f64..=1.0,
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn matches_explicit_sum((r, v, d, boot, gamma, lambda) in instance()) {
        let (adv, ret) = compute_gae(&r, &v, &d, boot, gamma, lambda).unwrap();
        let expected = common::brute_gae(&r, &v, &d, boot, gamma, lambda);
        for t in 0..r.len() {
            prop_assert!((adv[t] - expected[t]).abs() <= 1e-9, "t={} {} vs {}", t, adv[t], expected[t]);
            prop_assert!((ret[t] - (adv[t] + v[t])).abs() <= 1e-12);
        }
    }
}

#[test]
fn single_terminal_step_is_reward_minus_value() {
    let (adv, _) = compute_gae(&[1.0], &[0.25], &[true], 100.0, 0.99, 0.95).unwrap();
    assert_eq!(adv, [0.75]);
}

#[test]
fn length_mismatch_is_an_error() {
    assert!(compute_gae(&[1.0, 2.0], &[0.0], &[false, false], 0.0, 0.99, 0.95).is_err());
}
