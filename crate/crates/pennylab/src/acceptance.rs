//! The acceptance gate: every quantitative claim the library stands behind,
//! runnable as one suite.
//!
//! Each criterion measures a quantity and compares it against a fixed
//! threshold; results carry the measured value so a failure is diagnosable
//! from the one-line report. The fast tier covers the exact-arithmetic
//! checks plus a reduced-horizon regret audit; the full tier adds the
//! million-step ensembles.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::dynamics::{
    ensemble_map, mix_seed, run, run_telepathic, DynamicsOptions, OpponentScript, RunKind,
    RunSetup, TelepathicUpdate,
};
use crate::games::{
    make_competitive_family, make_matching_pennies, make_zero_sum_equivalent, nash_equilibrium,
    Game2x2, Player,
};
use crate::pmf::{
    demoivre_ratio_certificate, enumerate_bernoulli_sum_pmf, extremizer_oracle,
    poisson_binomial_pmf, shift_ratio_bound_check,
};
use crate::probes::{
    mclt_normality, oscillation_estimate, realized_regret_full, scan_sensitivity,
    stationarity_check, time_average_deviation, Normalization,
};
use crate::strategies::{
    counterfactual_hedge_iterate, monotonicity_check, Monotonicity, StrategySpec, StrategyState,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tier {
    /// Exact-arithmetic criteria plus the regret audit at t = 10^4.
    Fast,
    /// Everything, at the stated horizons (10^5 to 10^6 steps, ensembles of
    /// up to 500 runs).
    Full,
}

#[derive(Clone, Debug)]
pub struct CriterionResult {
    pub index: usize,
    pub name: &'static str,
    pub pass: bool,
    /// Measured value against its threshold, human-readable.
    pub detail: String,
    pub seconds: f64,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "[{:>2}] {} {:<26} {} [{:.1}s]",
            self.index,
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.detail,
            self.seconds
        )
    }
}

type CritFn = fn(Tier) -> Result<(bool, String), String>;

// (index, name, body, included in the fast tier)
const CRITERIA: &[(usize, &str, CritFn, bool)] = &[
    (0, "monotone-strategy-maps", guard_monotone, true),
    (1, "equilibrium-closed-forms", crit_equilibria, true),
    (2, "poisson-binomial-oracle", crit_poisson_binomial, true),
    (3, "hedge-regret-rate", crit_regret, true),
    (4, "time-average-convergence", crit_time_average, false),
    (5, "oscillation-vs-stationary", crit_oscillation_stationary, false),
    (6, "oscillation-all-families", crit_oscillation_families, false),
    (7, "telepathic-contrast", crit_telepathic, false),
    (8, "tail-sensitivity-scan", crit_sensitivity, false),
    (9, "iid-stationarity", crit_stationarity, false),
    (10, "martingale-clt", crit_mclt, false),
    (11, "change-of-measure-floor", crit_change_of_measure, true),
    (12, "local-normal-certificate", crit_demoivre, true),
    (13, "extremizer-structure", crit_extremizer, true),
    (14, "adaptive-dominance", crit_dominance, true),
];

/// Runs the selected tier, in criterion order, timing each entry. Internal
/// errors surface as failed criteria, never as skips.
pub fn run_all(tier: Tier) -> Vec<CriterionResult> {
    CRITERIA
        .iter()
        .filter(|(_, _, _, fast)| tier == Tier::Full || *fast)
        .map(|&(index, name, body, _)| {
            let start = Instant::now();
            let (pass, detail) = body(tier).unwrap_or_else(|e| (false, format!("error: {e}")));
            CriterionResult { index, name, pass, detail, seconds: start.elapsed().as_secs_f64() }
        })
        .collect()
}

pub fn all_passed(results: &[CriterionResult]) -> bool {
    results.iter().all(|r| r.pass)
}

fn opts(tail_window: usize) -> DynamicsOptions {
    DynamicsOptions { tail_window, ..DynamicsOptions::default() }
}

fn mp() -> Game2x2<f64> {
    make_matching_pennies()
}

fn hedge_half() -> StrategySpec {
    StrategySpec::hedge(0.5).expect("0.5 is an admissible rate exponent")
}

// Tier guard: every strategy map must be directionally monotone in the
// opponent statistic, on every game and horizon we exercise.
fn guard_monotone(_tier: Tier) -> Result<(bool, String), String> {
    let games = [
        mp(),
        make_competitive_family(1.0, 1.0).map_err(|e| e.to_string())?,
        make_competitive_family(0.25, 0.429).map_err(|e| e.to_string())?,
    ];
    let specs = [
        StrategySpec::hedge(0.5),
        StrategySpec::hedge(0.7),
        StrategySpec::log_barrier(0.5),
        StrategySpec::optimistic_hedge(0.5, 1),
        StrategySpec::adaptive_hedge(1.0),
        StrategySpec::fixed(0.25),
    ];
    let mut checked = 0u64;
    for game in &games {
        for spec in &specs {
            let spec = spec.as_ref().map_err(|e| e.to_string())?;
            for role in [Player::One, Player::Two] {
                for t in [2u64, 11, 101, 10_001] {
                    let dir = monotonicity_check(spec, game, role, t, 513);
                    if dir == Monotonicity::NonMonotone {
                        return Ok((
                            false,
                            format!(
                                "non-monotone map: {} as player {:?} at t = {t}",
                                spec.descriptor(),
                                role
                            ),
                        ));
                    }
                    checked += 1;
                }
            }
        }
    }
    Ok((true, format!("{checked} map grids monotone (513-point statistic grids)")))
}

// Criterion 1: closed-form equilibria, exact to 1e-12, including the
// zero-sum twins.
fn crit_equilibria(_tier: Tier) -> Result<(bool, String), String> {
    let mut worst = 0.0f64;
    let mut check = |game: &Game2x2<f64>, p: f64, q: f64| -> Result<(), String> {
        let eq = nash_equilibrium(game).map_err(|e| e.to_string())?;
        worst = worst.max((eq.p_star - p).abs()).max((eq.q_star - q).abs());
        Ok(())
    };
    check(&mp(), 0.5, 0.5)?;
    for (alpha, beta) in [(0.111, 4.0), (0.25, 0.429)] {
        let p = beta / (1.0 + beta);
        let q = alpha / (1.0 + alpha);
        check(&make_competitive_family(alpha, beta).map_err(|e| e.to_string())?, p, q)?;
        check(&make_zero_sum_equivalent(alpha, beta).map_err(|e| e.to_string())?, p, q)?;
    }
    let mp_value = nash_equilibrium(&mp()).map_err(|e| e.to_string())?.r_star;
    worst = worst.max((mp_value - 0.5).abs());
    Ok((worst <= 1e-12, format!("max closed-form deviation {worst:.2e} (<= 1e-12)")))
}

// Criterion 2: the O(t^2) convolution against 2^t enumeration on random
// probability vectors.
fn crit_poisson_binomial(_tier: Tier) -> Result<(bool, String), String> {
    let mut rng = ChaCha12Rng::seed_from_u64(mix_seed(0, 2));
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let t = rng.gen_range(1..=16usize);
        let qs: Vec<f64> = (0..t).map(|_| rng.gen::<f64>()).collect();
        let dp = poisson_binomial_pmf(&qs).map_err(|e| e.to_string())?;
        let oracle = enumerate_bernoulli_sum_pmf(&qs).map_err(|e| e.to_string())?;
        for z in 0..=t as i64 {
            worst = worst.max((dp.mass_at(z) - oracle.mass_at(z)).abs());
        }
    }
    Ok((worst <= 1e-12, format!("max |DP - enumeration| = {worst:.2e} over 100 cases (<= 1e-12)")))
}

// Criterion 3: realized regret of Hedge at the optimal rate stays below
// 3 sqrt(t) against fixed, i.i.d., and adaptive opponents.
fn crit_regret(tier: Tier) -> Result<(bool, String), String> {
    let t: u64 = if tier == Tier::Fast { 10_000 } else { 100_000 };
    let adversaries: [(&str, RunKind); 3] = [
        ("fixed-ones", RunKind::VsScript { script: OpponentScript::IidBernoulli(1.0) }),
        ("iid-half", RunKind::VsScript { script: OpponentScript::IidBernoulli(0.5) }),
        ("opposite", RunKind::VsOppositeAdversary),
    ];
    let mut worst = f64::NEG_INFINITY;
    let mut worst_name = "";
    for (k, (name, kind)) in adversaries.iter().enumerate() {
        let setup = RunSetup {
            game: mp(),
            spec1: hedge_half(),
            kind: kind.clone(),
            steps: t,
            opts: opts(t as usize),
        };
        let normalized = ensemble_map(20, mix_seed(3, k as u64), |_, seed| {
            realized_regret_full(&run(&setup, seed), Player::One).map(|r| r.normalized)
        });
        for v in normalized {
            let v = v.map_err(|e| e.to_string())?;
            if v > worst {
                worst = v;
                worst_name = name;
            }
        }
    }
    Ok((
        worst <= 3.0,
        format!("max regret/sqrt(t) = {worst:.3} ({worst_name}, 60 runs, t = {t}) (<= 3)"),
    ))
}

// Criterion 4: sqrt(t)-scaled time-average deviation from the equilibrium
// stays below 5 on every checkpoint past 10^3, in at least 18 of 20 seeds.
fn crit_time_average(_tier: Tier) -> Result<(bool, String), String> {
    let game = mp();
    let eq = nash_equilibrium(&game).map_err(|e| e.to_string())?;
    let setup = RunSetup {
        game,
        spec1: hedge_half(),
        kind: RunKind::Realization { spec2: hedge_half() },
        steps: 1_000_000,
        opts: opts(0),
    };
    let maxima: Vec<f64> = ensemble_map(20, mix_seed(0, 4), |_, seed| {
        time_average_deviation(&run(&setup, seed), &eq)
            .into_iter()
            .filter(|&(t, _)| t >= 1_000)
            .map(|(_, v)| v)
            .fold(0.0, f64::max)
    });
    let bounded = maxima.iter().filter(|&&m| m <= 5.0).count();
    let worst = maxima.iter().copied().fold(0.0, f64::max);
    Ok((
        bounded >= 18,
        format!("{bounded}/20 seeds with max sqrt(t)|qbar - q*| <= 5 (worst {worst:.2}; need >= 18)"),
    ))
}

// Criterion 5: a stationary equilibrium opponent still leaves the learner's
// last iterate deviating by 0.1 in at least half the runs at t = 10^6.
fn crit_oscillation_stationary(_tier: Tier) -> Result<(bool, String), String> {
    let setup = RunSetup {
        game: mp(),
        spec1: hedge_half(),
        kind: RunKind::Realization { spec2: StrategySpec::fixed(0.5).map_err(|e| e.to_string())? },
        steps: 1_000_000,
        opts: opts(0),
    };
    let rep =
        oscillation_estimate(&setup, 0.5, 0.1, 200, mix_seed(0, 5)).map_err(|e| e.to_string())?;
    let frac = *rep.fraction_deviating.last().unwrap();
    Ok((frac >= 0.5, format!("P(|P_t - 1/2| >= 0.1) = {frac:.3} at t = 1e6, 200 runs (>= 0.5)")))
}

// Criterion 6: the same oscillation statistic in self-play, for each
// strategy family. The deviation scale delta is per family: the log-barrier
// map's slope at the center is 1/8 against the hedge map's 1/4, so the same
// statistic swing moves its mixture half as far, and 0.05 is the equivalent
// deviation. (The 0.1/0.5 pair is calibration, not a derived constant; the
// small-horizon enumeration oracle in the probe tests backs the estimator.)
fn crit_oscillation_families(_tier: Tier) -> Result<(bool, String), String> {
    let families: [(&str, StrategySpec, f64); 3] = [
        ("hedge", hedge_half(), 0.1),
        (
            "optimistic-hedge",
            StrategySpec::optimistic_hedge(0.5, 1).map_err(|e| e.to_string())?,
            0.1,
        ),
        ("log-barrier", StrategySpec::log_barrier(0.5).map_err(|e| e.to_string())?, 0.05),
    ];
    let mut all_pass = true;
    let mut parts = Vec::new();
    for (k, (name, spec, delta)) in families.iter().enumerate() {
        let setup = RunSetup {
            game: mp(),
            spec1: spec.clone(),
            kind: RunKind::Realization { spec2: spec.clone() },
            steps: 1_000_000,
            opts: opts(0),
        };
        let rep = oscillation_estimate(&setup, 0.5, *delta, 200, mix_seed(6, k as u64))
            .map_err(|e| e.to_string())?;
        let frac = *rep.fraction_deviating.last().unwrap();
        all_pass &= frac >= 0.5;
        parts.push(format!("{name} {frac:.3} (delta {delta})"));
    }
    Ok((all_pass, format!("t = 1e6 deviation fractions: {} (each >= 0.5)", parts.join(", "))))
}

// Criterion 7: mixture feedback separates the algorithms: recency bias
// converges in last iterate, classic incremental multiplicative weights
// keeps cycling. Both legs start off-center; the centered profile is an
// exact fixed point, so from it neither behavior would be observable. The
// cycling leg needs the incremental update: the mean-based map damps under
// a decaying rate (its max deviation is also measured and reported).
fn crit_telepathic(_tier: Tier) -> Result<(bool, String), String> {
    let game = mp();
    let start = Some((0.9, 0.1));
    let optimistic = StrategySpec::optimistic_hedge(0.5, 1).map_err(|e| e.to_string())?;
    let conv_opts = DynamicsOptions { telepathic_start: start, ..opts(0) };
    let conv = run_telepathic(&game, &optimistic, &optimistic, 100_000, &conv_opts);
    let final_dev = (conv.final_checkpoint().p_t - 0.5).abs();

    // Full resolution over [1e5, 1e6] so the swing can't fall between
    // checkpoints.
    let max_dev_over_window = |update: TelepathicUpdate| {
        let o = DynamicsOptions {
            telepathic_start: start,
            telepathic_update: update,
            ..opts(900_001)
        };
        let traj = run_telepathic(&game, &hedge_half(), &hedge_half(), 1_000_000, &o);
        traj.tail.p.iter().map(|p| (p - 0.5).abs()).fold(0.0, f64::max)
    };
    let max_dev = max_dev_over_window(TelepathicUpdate::Incremental);
    let damped = max_dev_over_window(TelepathicUpdate::MeanBased);
    Ok((
        final_dev <= 0.01 && max_dev >= 0.25,
        format!(
            "from (0.9, 0.1): optimistic |p - 1/2| = {final_dev:.1e} at t = 1e5 (<= 0.01); incremental MW max = {max_dev:.2} on [1e5, 1e6] (>= 0.25; the mean-based map damps to {damped:.1e} there)"
        ),
    ))
}

// Criterion 8: a sqrt(t)-length engineered tail visibly moves the mean
// response away from the stationary 1/2.
fn crit_sensitivity(_tier: Tier) -> Result<(bool, String), String> {
    let scan = scan_sensitivity(&hedge_half(), &mp(), 100_000, 2.0, 200, mix_seed(0, 8))
        .map_err(|e| e.to_string())?;
    let best = scan.best();
    let ci_low = best.mean_response - best.ci_halfwidth;
    Ok((
        best.mean_response >= 0.6 && ci_low > 0.55,
        format!(
            "best s = {}: mean response {:.3} +- {:.3} (>= 0.6, CI low > 0.55)",
            best.s, best.mean_response, best.ci_halfwidth
        ),
    ))
}

// Criterion 9: against an i.i.d. equilibrium opponent, payoff and count
// rates match their exact expectations within Monte Carlo error.
fn crit_stationarity(_tier: Tier) -> Result<(bool, String), String> {
    let game = mp();
    let eq = nash_equilibrium(&game).map_err(|e| e.to_string())?;
    let rep = stationarity_check(&game, &hedge_half(), eq.q_star, 10_000, 500, mix_seed(0, 9))
        .map_err(|e| e.to_string())?;
    let pay_dev = (rep.mean_payoff_rate - eq.r_star).abs();
    let cnt_dev = (rep.mean_count_rate - eq.q_star).abs();
    Ok((
        pay_dev <= 3.0 * rep.payoff_rate_se && cnt_dev <= 3.0 * rep.count_rate_se,
        format!(
            "payoff dev {pay_dev:.1e} (<= 3 SE = {:.1e}); count dev {cnt_dev:.1e} (<= {:.1e})",
            3.0 * rep.payoff_rate_se,
            3.0 * rep.count_rate_se
        ),
    ))
}

// Criterion 10: normalized count deviations are KS-close to standard
// normal under both a stationary and a learning opponent.
fn crit_mclt(_tier: Tier) -> Result<(bool, String), String> {
    let configs: [(&str, RunKind); 2] = [
        (
            "vs-fixed",
            RunKind::Realization { spec2: StrategySpec::fixed(0.5).map_err(|e| e.to_string())? },
        ),
        ("hedge-vs-hedge", RunKind::Realization { spec2: hedge_half() }),
    ];
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for (k, (name, kind)) in configs.iter().enumerate() {
        let setup = RunSetup {
            game: mp(),
            spec1: hedge_half(),
            kind: kind.clone(),
            steps: 100_000,
            opts: opts(0),
        };
        let rep = mclt_normality(&setup, 500, mix_seed(10, k as u64), Normalization::BySigmaHat)
            .map_err(|e| e.to_string())?;
        let ks = rep.ks_statistic.ok_or("degenerate variance in an MCLT replica")?;
        worst = worst.max(ks);
        parts.push(format!("{name} {ks:.3}"));
    }
    Ok((worst <= 0.1, format!("KS distances: {} (each <= 0.1, 500 replicas)", parts.join(", "))))
}

// Criterion 11: the constant change-of-measure floor (1 + beta0)^(-alpha),
// gated as stated. Exact pmf evaluation refutes that constant (it collapses
// the valid windowed floor (1 + beta0/sqrt(t))^(-s) a step too far, see the
// shift_ratio_bound_check docs), so this criterion is expected red; the
// detail reports both floors so the gap is visible in the log.
fn crit_change_of_measure(_tier: Tier) -> Result<(bool, String), String> {
    let mut constant_margin = f64::INFINITY;
    let mut windowed_margin = f64::INFINITY;
    let mut violations = 0u32;
    let mut cells = 0u32;
    let mut worst_cell = String::new();
    for t in [100u64, 400, 10_000] {
        let root = (t as f64).sqrt();
        for s in [0u64, (root / 2.0) as u64, root as u64] {
            for q in [0.2f64, 0.5, 0.8] {
                let chk = shift_ratio_bound_check(t, s, q, 1.0).map_err(|e| e.to_string())?;
                let alpha = s as f64 / root;
                let beta0 = 1.0 / q;
                let constant = (1.0 + beta0).powf(-alpha);
                let margin = chk.measured - constant;
                if margin < 0.0 {
                    violations += 1;
                }
                if margin < constant_margin {
                    constant_margin = margin;
                    worst_cell =
                        format!("t = {t}, s = {s}, q = {q}: {:.3} < {constant:.3}", chk.measured);
                }
                windowed_margin = windowed_margin.min(chk.measured - chk.bound);
                cells += 1;
            }
        }
    }
    Ok((
        constant_margin >= 0.0,
        format!(
            "constant floor violated at {violations}/{cells} cells (worst {worst_cell}); windowed floor margin {windowed_margin:.2e} >= 0 everywhere"
        ),
    ))
}

// Criterion 12: the binomial-to-normal pointwise certificate at q = 1/2 on
// the 2 sqrt(t) window, shrinking monotonically along the t-ladder.
fn crit_demoivre(_tier: Tier) -> Result<(bool, String), String> {
    let ladder = [1_000u64, 10_000, 100_000, 1_000_000];
    let mut certs = Vec::with_capacity(ladder.len());
    for t in ladder {
        certs.push(demoivre_ratio_certificate(t, 0.5, 2.0).map_err(|e| e.to_string())?);
    }
    let monotone = certs.windows(2).all(|w| w[1] < w[0]);
    let pass = certs[1] <= 0.1 && certs[3] <= 0.01 && monotone;
    Ok((
        pass,
        format!(
            "certificate at 1e4: {:.2e} (<= 0.1), at 1e6: {:.2e} (<= 0.01), monotone: {monotone}",
            certs[1], certs[3]
        ),
    ))
}

// Criterion 13: every zero-sum deviation vector minimizing the hit
// probability sits on the extreme grid points {-d, 0, +d}. Gated as stated,
// and expected red: exhaustive search finds strictly better interior
// vectors at some asymmetric cells (q_bar = 0.3), e.g. t = 3, z = 2,
// d = 0.1, where (+0.1, -0.05, -0.05) hits 0.1875 against 0.188 for the
// best extreme-point vector. The symmetric q_bar = 0.5 cells all conform.
fn crit_extremizer(_tier: Tier) -> Result<(bool, String), String> {
    let mut searches = 0u32;
    let mut violations = 0u32;
    let mut first = String::new();
    for t in 1..=6u64 {
        for z in 0..=t {
            for q_bar in [0.3, 0.5] {
                for delta in [0.1, 0.2] {
                    let rep = extremizer_oracle(t, q_bar, delta, z, 9).map_err(|e| e.to_string())?;
                    searches += 1;
                    if !rep.all_extreme {
                        violations += 1;
                        if first.is_empty() {
                            first = format!(
                                "first: t = {t}, z = {z}, q_bar = {q_bar}, delta = {delta}, {:?} at P = {:.4}",
                                rep.minimizers[0], rep.min_prob
                            );
                        }
                    }
                }
            }
        }
    }
    if violations == 0 {
        Ok((true, format!("{searches} exhaustive searches, all minimizer coords in {{-d, 0, +d}}")))
    } else {
        Ok((false, format!("interior minimizers at {violations}/{searches} cells ({first})")))
    }
}

// Criterion 14: the adaptive rate never deviates less from 1/2 than the
// floor-rate reference iterate, exhaustively for short histories and by
// sampling at t = 10^3.
fn crit_dominance(_tier: Tier) -> Result<(bool, String), String> {
    let game = mp();
    let c = 1.0;
    let spec = StrategySpec::adaptive_hedge(c).map_err(|e| e.to_string())?;
    let mut min_margin = f64::INFINITY;

    // All opponent histories of up to 11 bits: every prefix is checked, so
    // this covers every history with t <= 12.
    for bits in 0u32..(1 << 11) {
        let mut state = StrategyState::new(spec.clone());
        for step in 0..11 {
            let p = state.mixture(&game);
            if state.summary().t() >= 2 {
                let reference = counterfactual_hedge_iterate(state.summary(), c);
                min_margin = min_margin.min((p - 0.5).abs() - (reference - 0.5).abs());
            }
            state.record_opponent(bits >> step & 1 == 1);
        }
        let p = state.mixture(&game);
        let reference = counterfactual_hedge_iterate(state.summary(), c);
        min_margin = min_margin.min((p - 0.5).abs() - (reference - 0.5).abs());
    }

    let sampled = ensemble_map(10_000, mix_seed(0, 14), |_, seed| {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut state = StrategyState::new(spec.clone());
        for _ in 0..999 {
            let _ = state.mixture(&game);
            state.record_opponent(rng.gen::<f64>() < 0.5);
        }
        let p = state.mixture(&game);
        let reference = counterfactual_hedge_iterate(state.summary(), c);
        (p - 0.5).abs() - (reference - 0.5).abs()
    });
    for m in sampled {
        min_margin = min_margin.min(m);
    }

    // The two sides come from different expression trees: the live path
    // derives its payoff gap from the rounded running mean, the reference
    // from exact integer counts. Ties in exact arithmetic can land a few
    // ulps apart; a genuine floor violation would be orders of magnitude
    // larger (the rate floor is off by at least a factor of 2 whenever the
    // doubling proposal drops below it).
    let tolerance = -1e-14;
    Ok((
        min_margin >= tolerance,
        format!("min deviation margin = {min_margin:.1e} over all checks (>= -1e-14)"),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fast_tier_selects_the_exact_arithmetic_criteria() {
        let fast: Vec<usize> = CRITERIA
            .iter()
            .filter(|(_, _, _, fast)| *fast)
            .map(|&(idx, ..)| idx)
            .collect();
        assert_eq!(fast, vec![0, 1, 2, 3, 11, 12, 13, 14]);
    }

    #[test]
    fn result_lines_carry_verdict_and_measurement() {
        let r = CriterionResult {
            index: 1,
            name: "equilibrium-closed-forms",
            pass: true,
            detail: "max closed-form deviation 1.1e-16 (<= 1e-12)".into(),
            seconds: 0.01,
        };
        let line = r.line();
        assert!(line.contains("PASS"));
        assert!(line.contains("1.1e-16"));
    }
}
