use approx::assert_abs_diff_eq;
use pennylab::games::{make_matching_pennies, Player};
use pennylab::strategies::{
    apply_recency_bias, counterfactual_hedge_iterate, cumulative_payoff_gap, hedge_map,
    log_barrier_root, map_at_statistic, monotonicity_check, stable_logistic, HistorySummary,
    LearningRateSchedule, Monotonicity, RecencySpec, SpecError, StrategySpec, StrategyState,
};
use proptest::prelude::*;

fn sched_half() -> LearningRateSchedule {
    LearningRateSchedule::fixed_power(0.5).unwrap()
}

#[test]
fn hedge_matches_the_worked_point() {
    let game = make_matching_pennies::<f64>();
    let p = hedge_map(&game, Player::One, 101, 0.6, &sched_half());
    // sigma(20/sqrt(101)), evaluated independently at high precision.
    assert_abs_diff_eq!(p, 0.8797510063976371, epsilon = 1e-15);

    // Same number through the explicit two-weight softmax.
    let eta = 1.0 / (101f64).sqrt();
    let w1 = (eta * 100.0 * 0.6).exp();
    let w0 = (eta * 100.0 * 0.4).exp();
    assert_abs_diff_eq!(p, w1 / (w0 + w1), epsilon = 1e-15);
}

#[test]
fn hedge_is_exactly_half_at_the_symmetric_statistic() {
    let game = make_matching_pennies::<f64>();
    for t in [1, 2, 17, 101, 10_001, 1_000_000] {
        assert_eq!(hedge_map(&game, Player::One, t, 0.5, &sched_half()), 0.5);
        assert_eq!(hedge_map(&game, Player::Two, t, 0.5, &sched_half()), 0.5);
    }
}

#[test]
fn first_step_is_uniform_for_every_family() {
    let game = make_matching_pennies::<f64>();
    for desc in ["hedge:r=0.5", "logbarrier:r=0.7", "optimistic-hedge:r=0.5,ell=2"] {
        let spec = StrategySpec::parse(desc, Player::One).unwrap();
        // t = 1 zeroes the cumulative horizon, whatever the statistic.
        assert_eq!(map_at_statistic(&spec, &game, Player::One, 1, 0.9), 0.5, "{desc}");
    }
}

#[test]
fn log_barrier_root_agrees_with_bisection() {
    for d in [-30.0, -3.7, -0.9, 0.0, 1e-13, 0.4, 2.0, 17.5] {
        let p = log_barrier_root(d);
        let foc = |p: f64| d * p * p + (2.0 - d) * p - 1.0;
        assert!(foc(p).abs() <= 1e-10, "d = {d}: residual {}", foc(p));

        // The condition is -1 at p = 0 and +1 at p = 1; bisect it.
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if foc(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert_abs_diff_eq!(p, 0.5 * (lo + hi), epsilon = 1e-12);
    }
}

#[test]
fn log_barrier_worked_values() {
    assert_eq!(log_barrier_root(0.0), 0.5);
    assert_abs_diff_eq!(log_barrier_root(2.0), std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-15);
    // Large gaps approach the boundary monotonically without reaching it.
    let mut prev = 0.5;
    for d in [1.0, 10.0, 100.0, 1e4, 1e8, 1e15] {
        let p = log_barrier_root(d);
        assert!(p > prev && p < 1.0, "d = {d} gave {p}");
        prev = p;
    }
}

#[test]
fn recency_bias_matches_the_worked_examples() {
    // 100 realizations, 30 ones, the newest two both ones.
    let mut s = HistorySummary::new(3);
    for i in 0..100 {
        s.record(i >= 70);
    }
    assert_eq!(s.t(), 101);
    assert_eq!(s.z(), 30);

    let mean: f64 = apply_recency_bias(&s, &RecencySpec::mean_based());
    assert_eq!(mean, s.q_hat());
    assert_abs_diff_eq!(mean, 0.30, epsilon = 1e-15);

    let optimistic: f64 = apply_recency_bias(&s, &RecencySpec::optimistic());
    assert_abs_diff_eq!(optimistic, 0.31, epsilon = 1e-15);

    let weighted: f64 = apply_recency_bias(&s, &RecencySpec::new(vec![2, 1]).unwrap());
    assert_abs_diff_eq!(weighted, 0.33, epsilon = 1e-15);
}

#[test]
fn recency_bias_handles_warm_start_and_priors() {
    // Empty history: the statistic is the prior, whatever the bias.
    let fresh = HistorySummary::with_prior(1, 0.2);
    let stat: f64 = apply_recency_bias(&fresh, &RecencySpec::optimistic());
    assert_eq!(stat, 0.2);

    // A biased statistic may exceed 1; the payoff evaluation clamps it, so
    // the map result equals the one at statistic 1.
    let game = make_matching_pennies::<f64>();
    let mut all_ones = HistorySummary::new(2);
    for _ in 0..50 {
        all_ones.record(true);
    }
    let biased: f64 = apply_recency_bias(&all_ones, &RecencySpec::unit_weights(2));
    assert!(biased > 1.0);
    let sched = sched_half();
    assert_eq!(
        hedge_map(&game, Player::One, 51, biased, &sched),
        hedge_map(&game, Player::One, 51, 1.0, &sched),
    );
}

#[test]
fn counterfactual_iterate_matches_the_closed_form() {
    let mut s = HistorySummary::new(0);
    for i in 0..10_000 {
        s.record(i < 5_500);
    }
    assert_eq!(s.t(), 10_001);
    // sigma(1000/sqrt(10001)), evaluated independently at high precision.
    assert_abs_diff_eq!(counterfactual_hedge_iterate(&s, 1.0), 0.9999545794294218, epsilon = 1e-15);
}

#[test]
fn counterfactual_iterate_is_half_at_balance_and_increasing_in_the_count() {
    let mut half = HistorySummary::new(0);
    for i in 0..10 {
        half.record(i % 2 == 0);
    }
    assert_eq!(counterfactual_hedge_iterate(&half, 1.0), 0.5);

    let mut prev = -1.0;
    for z in 0..=100u64 {
        let mut s = HistorySummary::new(0);
        for i in 0..100 {
            s.record((i as u64) < z);
        }
        let p = counterfactual_hedge_iterate(&s, 1.0);
        assert!(p > prev, "not increasing at z = {z}");
        prev = p;
    }
}

#[test]
#[should_panic(expected = "at least one observation")]
fn counterfactual_iterate_rejects_an_empty_history() {
    counterfactual_hedge_iterate(&HistorySummary::new(0), 1.0);
}

#[test]
fn mean_based_families_see_only_the_counts() {
    let game = make_matching_pennies::<f64>();
    // Two shuffles of the same multiset: 4 ones in 10 bits.
    let a = [true, true, false, false, true, false, false, false, true, false];
    let b = [false, false, true, false, true, true, false, false, false, true];
    let run = |spec: &StrategySpec, bits: &[bool]| {
        let mut st = StrategyState::new(spec.clone());
        for &bit in bits {
            st.record_opponent(bit);
        }
        st.mixture(&game)
    };
    for desc in ["hedge:r=0.5", "hedge:r=0.7", "logbarrier:r=0.5", "fixed:q=0.3"] {
        let spec = StrategySpec::parse(desc, Player::One).unwrap();
        assert_eq!(run(&spec, &a).to_bits(), run(&spec, &b).to_bits(), "{desc}");
    }
    // Recency bias is order-sensitive by construction (a ends 0, b ends 1).
    let spec = StrategySpec::parse("optimistic-hedge:r=0.5,ell=1", Player::One).unwrap();
    assert_ne!(run(&spec, &a), run(&spec, &b));
}

#[test]
fn adaptive_rate_floors_at_c_over_sqrt_t() {
    let game = make_matching_pennies::<f64>();
    let mut st = StrategyState::new(StrategySpec::adaptive_hedge(1.0).unwrap());
    for step in 1..=1_000u64 {
        let _ = st.mixture(&game);
        let floor = 1.0 / (step as f64).sqrt();
        assert!(st.last_eta() >= floor, "step {step}: {} < {floor}", st.last_eta());
        st.record_opponent(true);
    }
    // A monotone opponent drives the gap range to ~t, so the doubling
    // proposal (~1/t) sits far below the floor, which must bind exactly.
    let _ = st.mixture(&game);
    assert_eq!(st.last_eta(), 1.0 / (1_001f64).sqrt());
}

#[test]
fn adaptive_map_is_half_on_a_balanced_history() {
    let game = make_matching_pennies::<f64>();
    let mut st = StrategyState::new(StrategySpec::adaptive_hedge(2.0).unwrap());
    for i in 0..40 {
        let p = st.mixture(&game);
        if i % 2 == 0 {
            assert_eq!(p, 0.5, "balanced prefix at step {}", i + 1);
        }
        st.record_opponent(i % 2 == 0);
    }
}

#[test]
fn adaptive_rate_depends_on_the_arrival_order() {
    // (1,1,0) and (1,0,1) share (t, z) but not the prefix gap range, so the
    // doubling proposal differs; only the count-based families are
    // order-blind.
    let game = make_matching_pennies::<f64>();
    let run = |bits: &[bool]| {
        let mut st = StrategyState::new(StrategySpec::adaptive_hedge(0.1).unwrap());
        for &bit in bits {
            let _ = st.mixture(&game);
            st.record_opponent(bit);
        }
        st.mixture(&game)
    };
    assert_ne!(run(&[true, true, false]), run(&[true, false, true]));
}

#[test]
fn descriptor_grammar_rejects_bad_input() {
    let p = |s: &str| StrategySpec::parse(s, Player::One);
    assert!(matches!(p("hedge:r=0.3"), Err(SpecError::RateOutOfRange { .. })));
    assert!(matches!(p("hedge:r=1.0"), Err(SpecError::RateOutOfRange { .. })));
    assert!(matches!(p("hedge"), Err(SpecError::MissingKey { .. })));
    assert!(matches!(p("frplb:r=0.5"), Err(SpecError::UnknownFamily(_))));
    assert!(matches!(p("hedge:q=0.5"), Err(SpecError::UnknownKey { .. })));
    assert!(matches!(p("hedge:r=zebra"), Err(SpecError::MalformedValue { .. })));
    assert!(matches!(p("   "), Err(SpecError::EmptyDescriptor)));
    assert!(matches!(p("fixed:q=1.4"), Err(SpecError::MixtureOutOfRange { .. })));
    assert!(matches!(p("adahedge:C=0"), Err(SpecError::NonPositiveFloor { .. })));
    assert!(matches!(
        RecencySpec::new(vec![3, 1]),
        Err(SpecError::BadRecencyWeight { ell: 2, weight: 3 })
    ));
}

#[test]
fn monotone_directions_depend_on_the_seat() {
    let game = make_matching_pennies::<f64>();
    let hedge = StrategySpec::hedge(0.5).unwrap();
    let barrier = StrategySpec::log_barrier(0.5).unwrap();
    for t in [2, 11, 101] {
        // Player 1 wants to match, player 2 to mismatch.
        assert_eq!(monotonicity_check(&hedge, &game, Player::One, t, 257), Monotonicity::NonDecreasing);
        assert_eq!(monotonicity_check(&hedge, &game, Player::Two, t, 257), Monotonicity::NonIncreasing);
        assert_eq!(monotonicity_check(&barrier, &game, Player::One, t, 257), Monotonicity::NonDecreasing);
    }
    let fixed = StrategySpec::fixed(0.25).unwrap();
    assert_eq!(monotonicity_check(&fixed, &game, Player::One, 5, 3), Monotonicity::NonDecreasing);
}

proptest! {
    #[test]
    fn logistic_complements_sum_to_one(x in -700.0f64..700.0) {
        let s = stable_logistic(x) + stable_logistic(-x);
        prop_assert!((s - 1.0).abs() <= 1e-15);
    }

    #[test]
    fn regularized_maps_stay_strictly_interior(
        t in 1u64..1_000_000,
        stat in 0.0f64..=1.0,
        role_one in any::<bool>(),
        barrier in any::<bool>(),
    ) {
        let game = make_matching_pennies::<f64>();
        let spec = if barrier {
            StrategySpec::log_barrier(0.5).unwrap()
        } else {
            StrategySpec::hedge(0.5).unwrap()
        };
        let role = if role_one { Player::One } else { Player::Two };
        let p = map_at_statistic(&spec, &game, role, t, stat);
        prop_assert!(p > 0.0 && p < 1.0);
    }

    #[test]
    fn log_barrier_root_is_increasing(a in -50.0f64..50.0, b in -50.0f64..50.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(log_barrier_root(lo) <= log_barrier_root(hi));
    }

    #[test]
    fn log_barrier_map_solves_its_first_order_condition(
        t in 2u64..100_000,
        stat in 0.0f64..=1.0,
    ) {
        let game = make_matching_pennies::<f64>();
        let spec = StrategySpec::log_barrier(0.5).unwrap();
        let p = map_at_statistic(&spec, &game, Player::One, t, stat);
        let eta = (t as f64).powf(-0.5);
        let d = eta * cumulative_payoff_gap(&game, Player::One, t, stat);
        prop_assert!((d * p * p + (2.0 - d) * p - 1.0).abs() <= 1e-10);
    }
}
