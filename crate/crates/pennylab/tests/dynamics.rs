use approx::assert_abs_diff_eq;
use pennylab::dynamics::{
    exact_count_distribution, mix_seed, monte_carlo, run, run_realization, run_telepathic,
    run_vs_script, DynamicsOptions, OpponentScript, RunKind, RunSetup, TelepathicUpdate,
};
use pennylab::games::{make_matching_pennies, Player};
use pennylab::pmf::binomial_pmf;
use pennylab::strategies::{map_at_statistic, StrategySpec};

fn mp() -> pennylab::games::Game2x2<f64> {
    make_matching_pennies()
}

fn opts(tail_window: usize) -> DynamicsOptions {
    DynamicsOptions { tail_window, ..DynamicsOptions::default() }
}

fn hedge() -> StrategySpec {
    StrategySpec::hedge(0.5).unwrap()
}

#[test]
fn realization_runs_are_pure_functions_of_setup_and_seed() {
    let a = run_realization(&mp(), &hedge(), &hedge(), 3_000, 42, &opts(100));
    let b = run_realization(&mp(), &hedge(), &hedge(), 3_000, 42, &opts(100));
    assert_eq!(a, b);
    assert_eq!(a.seed, Some(42));

    let c = run_realization(&mp(), &hedge(), &hedge(), 3_000, 43, &opts(100));
    assert_ne!(a.tail.j_bits, c.tail.j_bits);
}

#[test]
fn telepathic_runs_reproduce_without_a_seed() {
    let a = run_telepathic(&mp(), &hedge(), &hedge(), 2_000, &opts(50));
    let b = run_telepathic(&mp(), &hedge(), &hedge(), 2_000, &opts(50));
    assert_eq!(a, b);
    assert_eq!(a.seed, None);
    assert!(a.tail.i_bits.is_empty() && a.tail.j_bits.is_empty());
}

#[test]
fn degenerate_fixed_opponent_forces_the_count() {
    let spec2 = StrategySpec::fixed(1.0).unwrap();
    let traj = run_realization(&mp(), &hedge(), &spec2, 500, 7, &opts(0));
    let end = traj.final_checkpoint();
    assert_eq!(end.q_hat, 1.0);
    assert_eq!(end.z_t, 500.0);
}

#[test]
fn realized_counts_are_integers_and_match_the_tail_bits() {
    let traj = run_realization(&mp(), &hedge(), &hedge(), 400, 3, &opts(400));
    let end = traj.final_checkpoint();
    assert_eq!(end.z_t.fract(), 0.0);
    let z_from_bits: u64 = traj.tail.j_bits.iter().map(|&b| b as u64).sum();
    assert_eq!(end.z_t, z_from_bits as f64);
    assert_eq!(end.q_hat, z_from_bits as f64 / 400.0);
}

#[test]
fn evicted_payoffs_complete_the_cumulative_sums() {
    // Matching pennies payoffs are 0/1 and -1/0, so the bookkeeping
    // identity holds in exact integer arithmetic.
    let game = mp();
    let traj = run_realization(&game, &hedge(), &hedge(), 500, 11, &opts(100));
    assert_eq!(traj.tail.start_t, 401);
    let (mut sum1, mut sum2) = (traj.tail.evicted_payoff_1, traj.tail.evicted_payoff_2);
    for (&i, &j) in traj.tail.i_bits.iter().zip(&traj.tail.j_bits) {
        sum1 += game.g[i as usize][j as usize];
        sum2 += game.h[i as usize][j as usize];
    }
    let end = traj.final_checkpoint();
    assert_eq!(sum1, end.cum_payoff_1);
    assert_eq!(sum2, end.cum_payoff_2);
}

#[test]
fn telepathic_count_is_the_mixture_mean_times_t() {
    let traj = run_telepathic(&mp(), &hedge(), &StrategySpec::fixed(0.3).unwrap(), 100, &opts(0));
    let end = traj.final_checkpoint();
    assert_eq!(end.q_hat, end.q_bar);
    assert_abs_diff_eq!(end.z_t, 100.0 * end.q_bar, epsilon = 1e-12);
    assert_abs_diff_eq!(end.q_bar, 0.3, epsilon = 1e-15);
}

#[test]
fn symmetric_telepathic_play_is_pinned_to_the_center() {
    // Every map sends the centered statistic to 1/2, so the centered
    // profile reproduces itself exactly; this is the default-start
    // behavior, bit for bit.
    for spec1 in [hedge(), StrategySpec::log_barrier(0.5).unwrap()] {
        let traj =
            run_telepathic(&mp(), &spec1, &StrategySpec::fixed(0.5).unwrap(), 5_000, &opts(100));
        assert!(traj.checkpoints.iter().all(|c| c.p_t == 0.5 && c.q_t == 0.5));
        assert!(traj.tail.p.iter().all(|&p| p == 0.5));
        assert_eq!(traj.next_mixture_1, 0.5);
    }
}

#[test]
fn off_center_start_separates_the_telepathic_update_rules() {
    let game = mp();
    let common = DynamicsOptions { telepathic_start: Some((0.9, 0.1)), ..opts(1_000) };

    // Incremental weights settle into a persistent cycle.
    let cycling = DynamicsOptions {
        telepathic_update: TelepathicUpdate::Incremental,
        ..common
    };
    let traj = run_telepathic(&game, &hedge(), &hedge(), 10_000, &cycling);
    let max_late = traj.tail.p.iter().map(|p| (p - 0.5).abs()).fold(0.0, f64::max);
    assert!(max_late >= 0.2, "incremental cycle amplitude {max_late}");

    // The mean-based map damps toward the center instead.
    let damped = run_telepathic(&game, &hedge(), &hedge(), 10_000, &common);
    let max_damped = damped.tail.p.iter().map(|p| (p - 0.5).abs()).fold(0.0, f64::max);
    assert!(max_damped < 0.05, "mean-based amplitude {max_damped}");
}

#[test]
#[should_panic(expected = "plain hedge only")]
fn incremental_update_rejects_other_families() {
    let o = DynamicsOptions {
        telepathic_update: TelepathicUpdate::Incremental,
        ..opts(0)
    };
    run_telepathic(&mp(), &StrategySpec::log_barrier(0.5).unwrap(), &hedge(), 10, &o);
}

#[test]
#[should_panic(expected = "interior")]
fn telepathic_start_must_be_interior() {
    let o = DynamicsOptions { telepathic_start: Some((1.2, 0.5)), ..opts(0) };
    run_telepathic(&mp(), &hedge(), &hedge(), 10, &o);
}

#[test]
#[should_panic(expected = "at least one step")]
fn zero_step_runs_are_rejected() {
    let setup = RunSetup {
        game: mp(),
        spec1: hedge(),
        kind: RunKind::VsOppositeAdversary,
        steps: 0,
        opts: opts(0),
    };
    run(&setup, 0);
}

#[test]
fn monte_carlo_replica_zero_matches_a_direct_run() {
    let setup = RunSetup {
        game: mp(),
        spec1: hedge(),
        kind: RunKind::Realization { spec2: hedge() },
        steps: 1_000,
        opts: opts(20),
    };
    let ensemble = monte_carlo(&setup, 3, 99);
    assert_eq!(ensemble.len(), 3);
    assert_eq!(ensemble[0], run(&setup, mix_seed(99, 0)));
    assert_eq!(ensemble[2], run(&setup, mix_seed(99, 2)));
}

#[test]
fn ensemble_mean_frequency_tracks_the_fixed_mixture() {
    let setup = RunSetup {
        game: mp(),
        spec1: StrategySpec::fixed(0.5).unwrap(),
        kind: RunKind::Realization { spec2: StrategySpec::fixed(0.2).unwrap() },
        steps: 1_000,
        opts: opts(0),
    };
    let runs = monte_carlo(&setup, 200, 5);
    let mean: f64 =
        runs.iter().map(|r| r.final_checkpoint().q_hat).sum::<f64>() / runs.len() as f64;
    // 3 standard errors of a Bernoulli(0.2) mean over 200 * 1000 draws.
    let se = (0.2f64 * 0.8 / 200_000.0).sqrt();
    assert!((mean - 0.2).abs() <= 3.0 * se, "mean {mean}, tolerance {}", 3.0 * se);
}

#[test]
fn path_enumeration_reduces_to_the_binomial_for_fixed_mixtures() {
    let dist = exact_count_distribution(
        &mp(),
        &StrategySpec::fixed(0.5).unwrap(),
        &StrategySpec::fixed(0.3).unwrap(),
        8,
    );
    let reference = binomial_pmf::<f64>(8, 0.3).unwrap();
    for z in 0..=8 {
        assert_abs_diff_eq!(dist.mass_at(z), reference.mass_at(z), epsilon = 1e-14);
    }
}

#[test]
fn script_with_empty_tail_is_plain_iid() {
    let iid = OpponentScript::IidBernoulli(0.4);
    let piecewise =
        OpponentScript::PiecewiseProp1 { q_star: 0.4, t_total: 2_000, s_tail: 0, tail_value: true };
    let a = run_vs_script(&mp(), &hedge(), iid, 2_000, 17, &opts(50));
    let b = run_vs_script(&mp(), &hedge(), piecewise, 2_000, 17, &opts(50));
    // Same draws, same trajectory; only the setup echo differs.
    assert_eq!(a.checkpoints, b.checkpoints);
    assert_eq!(a.tail, b.tail);
    assert_eq!(a.next_mixture_1, b.next_mixture_1);
}

#[test]
fn scripted_tail_forces_the_final_realizations() {
    let script =
        OpponentScript::PiecewiseProp1 { q_star: 0.5, t_total: 300, s_tail: 40, tail_value: true };
    let traj = run_vs_script(&mp(), &hedge(), script, 300, 23, &opts(40));
    assert!(traj.tail.j_bits.iter().all(|&b| b == 1));
    assert_eq!(script.mean_at(260), 0.5);
    assert_eq!(script.mean_at(261), 1.0);
}

#[test]
fn opposite_adversary_mirrors_the_previous_realization() {
    let traj = run(
        &RunSetup {
            game: mp(),
            spec1: hedge(),
            kind: RunKind::VsOppositeAdversary,
            steps: 200,
            opts: opts(200),
        },
        31,
    );
    let (i, j) = (&traj.tail.i_bits, &traj.tail.j_bits);
    assert_eq!(j[0], 0, "fictitious step-0 observation is action 1");
    for k in 1..200 {
        assert_eq!(j[k], 1 - i[k - 1], "step {}", k + 1);
    }
}

#[test]
fn next_mixture_is_the_map_at_the_full_history() {
    let traj = run_vs_script(&mp(), &hedge(), OpponentScript::IidBernoulli(0.7), 100, 13, &opts(100));
    let z: u64 = traj.tail.j_bits.iter().map(|&b| b as u64).sum();
    let expected = map_at_statistic(&hedge(), &mp(), Player::One, 101, z as f64 / 100.0);
    assert_eq!(traj.next_mixture_1, expected);
}

#[test]
fn equilibrium_neighborhood_counter_runs_over_every_step() {
    // A fixed opponent at the equilibrium never leaves the band; one at the
    // boundary never enters it.
    let inside = run_realization(&mp(), &hedge(), &StrategySpec::fixed(0.5).unwrap(), 64, 1, &opts(0));
    let n = inside.neighborhood.unwrap();
    assert_eq!(n.q_star, 0.5);
    assert_eq!(n.steps_inside, 64);

    let outside = run_realization(&mp(), &hedge(), &StrategySpec::fixed(0.0).unwrap(), 64, 1, &opts(0));
    assert_eq!(outside.neighborhood.unwrap().steps_inside, 0);
}

#[test]
fn recency_bias_converges_in_mixture_feedback_from_off_center() {
    // Off-center start, then the optimistic map pulls the pair to the
    // equilibrium; the band counter sees almost every step inside.
    let spec = StrategySpec::optimistic_hedge(0.5, 1).unwrap();
    let o = DynamicsOptions { telepathic_start: Some((0.9, 0.1)), ..opts(0) };
    let traj = run_telepathic(&mp(), &spec, &spec, 10_000, &o);
    let frac = traj.neighborhood.unwrap().steps_inside as f64 / 10_000.0;
    assert!(frac >= 0.9, "inside fraction {frac}");
    assert!((traj.final_checkpoint().p_t - 0.5).abs() <= 5e-3);
}

#[test]
fn checkpoint_csv_emits_a_row_per_checkpoint() {
    let traj = run_realization(&mp(), &hedge(), &hedge(), 100, 2, &opts(0));
    let mut buf = Vec::new();
    traj.write_checkpoints_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,p_t,q_t,p_hat,q_hat,p_bar,q_bar,payoff1,payoff2");
    assert_eq!(lines.len(), traj.checkpoints.len() + 1);
    // Floats round-trip: parse a q_bar back and compare bit for bit.
    let last: Vec<&str> = lines.last().unwrap().split(',').collect();
    assert_eq!(last[0].parse::<u64>().unwrap(), 100);
    let q_bar: f64 = last[6].parse().unwrap();
    assert_eq!(q_bar.to_bits(), traj.final_checkpoint().q_bar.to_bits());
}
