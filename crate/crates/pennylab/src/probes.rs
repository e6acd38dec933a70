//! Statistical probes over trajectories and ensembles: regret audits,
//! engineered-fluctuation sensitivity, last-iterate oscillation frequency,
//! time-average convergence, and a martingale-CLT normality check.
//!
//! Probes never prove the limit theorems they shadow; they are falsification
//! harnesses with explicit thresholds. Every probe is deterministic given
//! its configuration and master seed.

use serde::Serialize;
use thiserror::Error;

use crate::dynamics::{
    ensemble_map, run, run_vs_script, DynamicsOptions, FeedbackMode, OpponentScript, RunKind,
    RunSetup, Trajectory,
};
use crate::games::{nash_equilibrium, Equilibrium, Game2x2, GameError, Player};
use crate::numeric::{std_normal_cdf, Kahan};
use crate::strategies::StrategySpec;

#[derive(Debug, Error)]
pub enum ProbeError {
    #[error("probe needs realized actions, but the trajectory is telepathic")]
    NoRealizations,
    #[error("audit window starts at step {start_t}; full-run audit needs tail_window >= steps")]
    WindowIncomplete { start_t: u64 },
    #[error("{got} replicas, but the KS check needs at least {minimum}")]
    TooFewReplicas { got: u64, minimum: u64 },
    #[error("delta {delta} outside (0, {limit}) for p* = {p_star}")]
    BadDelta { delta: f64, p_star: f64, limit: f64 },
    #[error("tail length s = {s} outside 1..t = {t}")]
    BadTailLength { s: u64, t: u64 },
    #[error("scan grid empty: alpha_coeff * sqrt(t) = {s_max} < 1")]
    EmptyScanGrid { s_max: f64 },
    #[error("trajectory has no equilibrium-neighborhood counter")]
    MissingCounter,
    #[error(transparent)]
    Game(#[from] GameError),
}

/// Hindsight regret of one player over an audited window of realized play.
///
/// Payoff sums are integer-weighted over the four joint action counts, so
/// a learner that constantly plays the hindsight-best action gets regret
/// exactly 0.0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RegretReport {
    pub player: Player,
    pub window_start: u64,
    pub window_len: u64,
    pub realized_payoff: f64,
    pub best_fixed_payoff: f64,
    pub best_action: u8,
    pub regret: f64,
    /// regret / sqrt(window_len)
    pub normalized: f64,
}

/// Audits whatever window the trajectory stored at full resolution.
pub fn realized_regret(traj: &Trajectory, player: Player) -> Result<RegretReport, ProbeError> {
    if traj.mode != FeedbackMode::Realization || traj.tail.i_bits.is_empty() {
        return Err(ProbeError::NoRealizations);
    }
    let mut counts = [[0u64; 2]; 2];
    for (i, j) in traj.tail.i_bits.iter().zip(&traj.tail.j_bits) {
        counts[*i as usize][*j as usize] += 1;
    }
    let game = &traj.setup.game;
    let payoff = |i: usize, j: usize| match player {
        Player::One => game.g[i][j],
        Player::Two => game.h[i][j],
    };
    let mut realized = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            realized += counts[i][j] as f64 * payoff(i, j);
        }
    }
    // Payoff of constantly playing action a against the observed opponent
    // realizations.
    let fixed = |a: usize| -> f64 {
        match player {
            Player::One => {
                let opp0 = counts[0][0] + counts[1][0];
                let opp1 = counts[0][1] + counts[1][1];
                opp0 as f64 * game.g[a][0] + opp1 as f64 * game.g[a][1]
            }
            Player::Two => {
                let opp0 = counts[0][0] + counts[0][1];
                let opp1 = counts[1][0] + counts[1][1];
                opp0 as f64 * game.h[0][a] + opp1 as f64 * game.h[1][a]
            }
        }
    };
    let (f0, f1) = (fixed(0), fixed(1));
    let (best_action, best_fixed_payoff) = if f1 > f0 { (1u8, f1) } else { (0u8, f0) };
    let window_len = traj.tail.len() as u64;
    let regret = best_fixed_payoff - realized;
    Ok(RegretReport {
        player,
        window_start: traj.tail.start_t,
        window_len,
        realized_payoff: realized,
        best_fixed_payoff,
        best_action,
        regret,
        normalized: regret / (window_len as f64).sqrt(),
    })
}

/// Full-run audit; rejects trajectories whose stored window does not reach
/// back to step 1.
pub fn realized_regret_full(
    traj: &Trajectory,
    player: Player,
) -> Result<RegretReport, ProbeError> {
    if traj.mode == FeedbackMode::Realization && traj.tail.start_t != 1 {
        return Err(ProbeError::WindowIncomplete { start_t: traj.tail.start_t });
    }
    realized_regret(traj, player)
}

/// Mean next-step response of player 1 to scripted opponent histories that
/// end in an engineered constant tail.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SensitivityReport {
    /// History length the response map is evaluated on.
    pub t: u64,
    /// Constant-tail length.
    pub s: u64,
    pub mean_response: f64,
    /// 95% normal-approximation half-width (floored at ulp scale so it is
    /// positive even for degenerate constant responses).
    pub ci_halfwidth: f64,
    pub n_samples: u64,
}

/// Runs `n_samples` scripted histories (i.i.d. Bernoulli(q*) then `s` steps
/// of constant action 1) and reports the sample mean of the mixture the
/// learner would play next.
pub fn sensitivity_probe(
    spec1: &StrategySpec,
    game: &Game2x2<f64>,
    t: u64,
    s: u64,
    n_samples: u64,
    master_seed: u64,
) -> Result<SensitivityReport, ProbeError> {
    sensitivity_probe_with_tail(spec1, game, t, s, true, n_samples, master_seed)
}

/// As `sensitivity_probe`, but with a configurable tail action (constant 0
/// probes the mirror-image response).
pub fn sensitivity_probe_with_tail(
    spec1: &StrategySpec,
    game: &Game2x2<f64>,
    t: u64,
    s: u64,
    tail_value: bool,
    n_samples: u64,
    master_seed: u64,
) -> Result<SensitivityReport, ProbeError> {
    if s == 0 || s >= t {
        return Err(ProbeError::BadTailLength { s, t });
    }
    let q_star = nash_equilibrium(game)?.q_star;
    let script = OpponentScript::PiecewiseProp1 { q_star, t_total: t, s_tail: s, tail_value };
    let opts = DynamicsOptions { tail_window: 0, ..DynamicsOptions::default() };
    let responses = ensemble_map(n_samples, master_seed, |_, seed| {
        run_vs_script(game, spec1, script, t, seed, &opts).next_mixture_1
    });
    Ok(summarize_responses(t, s, &responses))
}

fn summarize_responses(t: u64, s: u64, responses: &[f64]) -> SensitivityReport {
    let n = responses.len() as f64;
    let mut sum = Kahan::new();
    for &r in responses {
        sum.add(r);
    }
    let mean = sum.value() / n;
    let mut sq = Kahan::new();
    for &r in responses {
        sq.add((r - mean) * (r - mean));
    }
    let sd = if responses.len() > 1 { (sq.value() / (n - 1.0)).sqrt() } else { 0.0 };
    let floor = f64::EPSILON * (1.0 + mean.abs());
    SensitivityReport {
        t,
        s,
        mean_response: mean,
        ci_halfwidth: (1.96 * sd / n.sqrt()).max(floor),
        n_samples: responses.len() as u64,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SensitivityScan {
    pub reports: Vec<SensitivityReport>,
    pub best_index: usize,
}

impl SensitivityScan {
    pub fn best(&self) -> &SensitivityReport {
        &self.reports[self.best_index]
    }
}

/// Probes a doubling s-grid in `{1 .. floor(alpha_coeff * sqrt(t))}` (the
/// endpoint included) and returns the scan with the response-maximizing s.
pub fn scan_sensitivity(
    spec1: &StrategySpec,
    game: &Game2x2<f64>,
    t: u64,
    alpha_coeff: f64,
    n_samples: u64,
    master_seed: u64,
) -> Result<SensitivityScan, ProbeError> {
    let s_max_f = alpha_coeff * (t as f64).sqrt();
    if s_max_f < 1.0 {
        return Err(ProbeError::EmptyScanGrid { s_max: s_max_f });
    }
    let s_max = (s_max_f.floor() as u64).min(t - 1);
    let mut grid = Vec::new();
    let mut s = 1u64;
    while s <= s_max {
        grid.push(s);
        s *= 2;
    }
    if grid.last() != Some(&s_max) {
        grid.push(s_max);
    }
    let mut reports = Vec::with_capacity(grid.len());
    for &s in &grid {
        // Per-s derived master seed keeps the scan points independent.
        reports.push(sensitivity_probe(
            spec1,
            game,
            t,
            s,
            n_samples,
            crate::dynamics::mix_seed(master_seed, s),
        )?);
    }
    let best_index = reports
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.mean_response.total_cmp(&b.1.mean_response))
        .map(|(i, _)| i)
        .unwrap();
    Ok(SensitivityScan { reports, best_index })
}

/// Per-checkpoint fraction of replicas whose last iterate strayed from p*.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OscillationReport {
    pub checkpoints: Vec<u64>,
    pub fraction_deviating: Vec<f64>,
    pub p_star: f64,
    pub delta: f64,
    pub n_runs: u64,
}

/// Runs the ensemble and, per checkpoint, counts replicas with
/// `|P_t - p*| >= delta`.
pub fn oscillation_estimate(
    setup: &RunSetup,
    p_star: f64,
    delta: f64,
    n_runs: u64,
    master_seed: u64,
) -> Result<OscillationReport, ProbeError> {
    let limit = p_star.min(1.0 - p_star);
    if !(delta > 0.0 && delta < limit) {
        return Err(ProbeError::BadDelta { delta, p_star, limit });
    }
    let per_run: Vec<Vec<(u64, f64)>> = ensemble_map(n_runs, master_seed, |_, seed| {
        run(setup, seed).checkpoints.iter().map(|c| (c.t, c.p_t)).collect()
    });
    let checkpoints: Vec<u64> = per_run[0].iter().map(|&(t, _)| t).collect();
    let mut deviating = vec![0u64; checkpoints.len()];
    for run_points in &per_run {
        debug_assert_eq!(run_points.len(), checkpoints.len());
        for (k, &(_, p_t)) in run_points.iter().enumerate() {
            if (p_t - p_star).abs() >= delta {
                deviating[k] += 1;
            }
        }
    }
    Ok(OscillationReport {
        checkpoints,
        fraction_deviating: deviating.iter().map(|&d| d as f64 / n_runs as f64).collect(),
        p_star,
        delta,
        n_runs,
    })
}

/// Scaled time-average deviations `t^(1-r) * |q_bar_t - q*|` at each
/// checkpoint; `r = 1/2` gives the sqrt(t) scaling of the optimal rate.
pub fn time_average_deviation_at_rate(
    traj: &Trajectory,
    eq: &Equilibrium<f64>,
    rate_r: f64,
) -> Vec<(u64, f64)> {
    traj.checkpoints
        .iter()
        .map(|c| (c.t, (c.t as f64).powf(1.0 - rate_r) * (c.q_bar - eq.q_star).abs()))
        .collect()
}

pub fn time_average_deviation(traj: &Trajectory, eq: &Equilibrium<f64>) -> Vec<(u64, f64)> {
    time_average_deviation_at_rate(traj, eq, 0.5)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Normalization {
    /// Divide by the realized conditional-variance accumulator
    /// sqrt(sum Q_s (1 - Q_s)); the martingale-CLT normalization.
    BySigmaHat,
    /// Divide by sqrt(t)/2, the variance ceiling attained at Q = 1/2.
    BySqrtT,
}

/// Kolmogorov-Smirnov comparison of the normalized count deviations
/// `t (q_hat - q_bar) / scale` against the standard normal.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MartingaleCheckReport {
    pub t: u64,
    /// None when a replica had zero accumulated variance (degenerate
    /// normalization; no KS value is meaningful).
    pub ks_statistic: Option<f64>,
    pub n_runs: u64,
    pub normalization: Normalization,
    pub degenerate_replicas: u64,
    pub sample_mean: f64,
    pub sample_variance: f64,
}

/// Runs `n_runs` replicas of `setup` (realization mode) and KS-tests the
/// normalized martingale sums for standard normality.
pub fn mclt_normality(
    setup: &RunSetup,
    n_runs: u64,
    master_seed: u64,
    normalization: Normalization,
) -> Result<MartingaleCheckReport, ProbeError> {
    if n_runs < 50 {
        return Err(ProbeError::TooFewReplicas { got: n_runs, minimum: 50 });
    }
    if setup.kind.mode() != FeedbackMode::Realization {
        return Err(ProbeError::NoRealizations);
    }
    let t = setup.steps;
    let raw: Vec<(f64, f64)> = ensemble_map(n_runs, master_seed, |_, seed| {
        let traj = run(setup, seed);
        let last = traj.final_checkpoint();
        // z_t - t*q_bar = sum of the per-step martingale differences
        // J_s - Q_s.
        (last.z_t - last.t as f64 * last.q_bar, traj.sum_q_var)
    });
    let mut degenerate = 0u64;
    let mut samples = Vec::with_capacity(raw.len());
    for &(diff_sum, var_sum) in &raw {
        let scale = match normalization {
            Normalization::BySigmaHat => var_sum.sqrt(),
            Normalization::BySqrtT => (t as f64).sqrt() / 2.0,
        };
        if scale == 0.0 {
            degenerate += 1;
        } else {
            samples.push(diff_sum / scale);
        }
    }
    let (ks, mean, var) = if degenerate > 0 {
        (None, f64::NAN, f64::NAN)
    } else {
        let n = samples.len() as f64;
        let mut sum = Kahan::new();
        for &x in &samples {
            sum.add(x);
        }
        let mean = sum.value() / n;
        let mut sq = Kahan::new();
        for &x in &samples {
            sq.add((x - mean) * (x - mean));
        }
        (Some(ks_distance_to_std_normal(&mut samples)), mean, sq.value() / (n - 1.0))
    };
    Ok(MartingaleCheckReport {
        t,
        ks_statistic: ks,
        n_runs,
        normalization,
        degenerate_replicas: degenerate,
        sample_mean: mean,
        sample_variance: var,
    })
}

// Exact sup-distance between the sample's empirical CDF and Phi.
fn ks_distance_to_std_normal(samples: &mut [f64]) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    let mut d: f64 = 0.0;
    for (k, &x) in samples.iter().enumerate() {
        let phi = std_normal_cdf(x);
        d = d.max(((k + 1) as f64 / n - phi).abs());
        d = d.max((phi - k as f64 / n).abs());
    }
    d
}

/// Monte Carlo means of the per-step payoff and opponent-count rates when
/// the opponent plays i.i.d. Bernoulli(q*). Under any mean-based learner
/// these have exact expectations R* and q*.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StationarityReport {
    pub t: u64,
    pub n_runs: u64,
    pub mean_payoff_rate: f64,
    pub payoff_rate_se: f64,
    pub mean_count_rate: f64,
    pub count_rate_se: f64,
}

pub fn stationarity_check(
    game: &Game2x2<f64>,
    spec1: &StrategySpec,
    q_star: f64,
    t: u64,
    n_runs: u64,
    master_seed: u64,
) -> Result<StationarityReport, ProbeError> {
    let setup = RunSetup {
        game: *game,
        spec1: spec1.clone(),
        kind: RunKind::VsScript { script: OpponentScript::IidBernoulli(q_star) },
        steps: t,
        opts: DynamicsOptions { tail_window: 0, ..DynamicsOptions::default() },
    };
    let rates: Vec<(f64, f64)> = ensemble_map(n_runs, master_seed, |_, seed| {
        let traj = run(&setup, seed);
        let last = traj.final_checkpoint();
        (last.cum_payoff_1 / t as f64, last.z_t / t as f64)
    });
    let n = n_runs as f64;
    let stats = |pick: &dyn Fn(&(f64, f64)) -> f64| -> (f64, f64) {
        let mut sum = Kahan::new();
        for r in &rates {
            sum.add(pick(r));
        }
        let mean = sum.value() / n;
        let mut sq = Kahan::new();
        for r in &rates {
            sq.add((pick(r) - mean) * (pick(r) - mean));
        }
        let sd = if n_runs > 1 { (sq.value() / (n - 1.0)).sqrt() } else { 0.0 };
        (mean, sd / n.sqrt())
    };
    let (mean_payoff_rate, payoff_rate_se) = stats(&|r| r.0);
    let (mean_count_rate, count_rate_se) = stats(&|r| r.1);
    Ok(StationarityReport {
        t,
        n_runs,
        mean_payoff_rate,
        payoff_rate_se,
        mean_count_rate,
        count_rate_se,
    })
}

/// Fraction of all steps whose player-2 mixture fell in
/// `[q*/2, (q*+1)/2]`, from the trajectory's online counter. Returns
/// `(q_star, fraction)`.
pub fn neighborhood_fraction(traj: &Trajectory) -> Result<(f64, f64), ProbeError> {
    let nb = traj.neighborhood.ok_or(ProbeError::MissingCounter)?;
    Ok((nb.q_star, nb.steps_inside as f64 / traj.setup.steps as f64))
}
