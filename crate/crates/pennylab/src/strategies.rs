//! Mean-based strategy maps and their descriptors.
//!
//! A strategy observes only the opponent's realization history (plus the
//! step index) and outputs the probability of playing action 1. The shipped
//! families:
//!
//! - `hedge`: exponential weights on cumulative payoffs at rate `t^-r`.
//! - `logbarrier`: follow-the-regularized-leader with a log barrier.
//! - `optimistic-hedge`: hedge on a recency-biased statistic that counts
//!   the last `ell` realizations extra times.
//! - `adahedge`: hedge with a data-dependent rate kept at or above a
//!   `C/sqrt(t)` floor.
//! - `fixed`: a constant mixture, mostly as opponent or control.
//!
//! Descriptors parse from compact strings such as `hedge:r=0.5`,
//! `optimistic-hedge:r=0.5,ell=1`, `adahedge:C=1.0`, `fixed:q=0.5`.

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::games::{Game2x2, Player};
use crate::scalar::Real;

#[derive(Debug, Error, PartialEq)]
pub enum SpecError {
    #[error("rate exponent r must lie in [0.5, 1) (got {value})")]
    RateOutOfRange { value: f64 },
    #[error("floor constant C must be > 0 (got {value})")]
    NonPositiveFloor { value: f64 },
    #[error("mixture q must lie in [0, 1] (got {value})")]
    MixtureOutOfRange { value: f64 },
    #[error("recency weights must be integers in 1..=ell (ell = {ell}, got {weight})")]
    BadRecencyWeight { ell: usize, weight: u32 },
    #[error("unknown strategy family `{0}`")]
    UnknownFamily(String),
    #[error("unknown key `{key}` for strategy `{family}`")]
    UnknownKey { family: String, key: String },
    #[error("missing key `{key}` for strategy `{family}`")]
    MissingKey { family: String, key: &'static str },
    #[error("malformed value `{value}` for key `{key}`")]
    MalformedValue { key: String, value: String },
    #[error("empty strategy descriptor")]
    EmptyDescriptor,
}

/// Running summary of the opponent's realizations as seen at step `t`: the
/// mixtures computed at step `t` may look at realizations `1..t-1` only.
///
/// Adaptive schedules keep their own running loss statistics in
/// [`StrategyState`]; the summary stores just the history counts.
#[derive(Clone, Debug, PartialEq)]
pub struct HistorySummary {
    t: u64,
    z: u64,
    recent: VecDeque<bool>,
    ell_max: usize,
    prior: f64,
}

impl HistorySummary {
    /// Empty history at step 1. `ell_max` bounds how many trailing
    /// realizations are retained for recency bias.
    pub fn new(ell_max: usize) -> Self {
        Self::with_prior(ell_max, 0.5)
    }

    /// Same, with an explicit statistic for the empty history. Every shipped
    /// strategy plays 0.5 at t = 1; the prior only matters for probing.
    pub fn with_prior(ell_max: usize, prior: f64) -> Self {
        Self { t: 1, z: 0, recent: VecDeque::with_capacity(ell_max), ell_max, prior }
    }

    pub fn record(&mut self, bit: bool) {
        self.t += 1;
        self.z += bit as u64;
        if self.ell_max > 0 {
            if self.recent.len() == self.ell_max {
                self.recent.pop_front();
            }
            self.recent.push_back(bit);
        }
    }

    /// Current step index; `t - 1` realizations have been recorded.
    pub fn t(&self) -> u64 {
        self.t
    }

    /// Count of recorded opponent action-1 realizations.
    pub fn z(&self) -> u64 {
        self.z
    }

    /// Unbiased empirical average `z/(t-1)`; the prior at t = 1.
    pub fn q_hat(&self) -> f64 {
        if self.t < 2 {
            self.prior
        } else {
            self.z as f64 / (self.t - 1) as f64
        }
    }

    /// The `j`-th most recent realization (j = 1 is the newest), if retained.
    fn recent_back(&self, j: usize) -> Option<bool> {
        if j == 0 || j > self.recent.len() {
            None
        } else {
            Some(self.recent[self.recent.len() - j])
        }
    }
}

/// Recency bias: how many trailing realizations are double-counted and with
/// what integer weights. `ell = 0` is the exact mean-based statistic.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecencySpec {
    ell: usize,
    weights: Vec<u32>,
}

impl RecencySpec {
    pub fn mean_based() -> Self {
        Self { ell: 0, weights: Vec::new() }
    }

    /// The optimistic statistic: the newest realization counted once more.
    pub fn optimistic() -> Self {
        Self { ell: 1, weights: vec![1] }
    }

    /// weights[j-1] is the extra multiplicity of the j-th most recent
    /// realization; each must lie in `1..=ell`.
    pub fn new(weights: Vec<u32>) -> Result<Self, SpecError> {
        let ell = weights.len();
        for &w in &weights {
            if w < 1 || w as usize > ell {
                return Err(SpecError::BadRecencyWeight { ell, weight: w });
            }
        }
        Ok(Self { ell, weights })
    }

    /// Uniform unit weights, the default for a bare `ell` in descriptors.
    pub fn unit_weights(ell: usize) -> Self {
        Self { ell, weights: vec![1; ell] }
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn weights(&self) -> &[u32] {
        &self.weights
    }
}

/// Step-size schedule for the regularized families.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum LearningRateSchedule {
    /// `eta_t = t^-r_exp` with `r_exp` in [0.5, 1).
    FixedPower { r_exp: f64 },
    /// Data-dependent rate floored at `c_floor / sqrt(t)`.
    AdaptiveWithFloor { c_floor: f64 },
}

impl LearningRateSchedule {
    pub fn fixed_power(r_exp: f64) -> Result<Self, SpecError> {
        if (0.5..1.0).contains(&r_exp) {
            Ok(Self::FixedPower { r_exp })
        } else {
            Err(SpecError::RateOutOfRange { value: r_exp })
        }
    }

    pub fn adaptive_with_floor(c_floor: f64) -> Result<Self, SpecError> {
        if c_floor > 0.0 && c_floor.is_finite() {
            Ok(Self::AdaptiveWithFloor { c_floor })
        } else {
            Err(SpecError::NonPositiveFloor { value: c_floor })
        }
    }

    /// The rate used for history-free evaluation: the fixed power, or the
    /// floor itself for the adaptive kind.
    pub fn stateless_eta(&self, t: u64) -> f64 {
        let tf = t as f64;
        match *self {
            Self::FixedPower { r_exp } => tf.powf(-r_exp),
            Self::AdaptiveWithFloor { c_floor } => c_floor / tf.sqrt(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StrategyFamily {
    Hedge,
    LogBarrier,
    FixedMixture,
    AdaptiveHedge,
}

/// A no-regret rate certificate: regret at most `c * t^r`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegretRate {
    pub r: f64,
    pub c: f64,
}

impl RegretRate {
    pub fn new(r: f64, c: f64) -> Result<Self, SpecError> {
        if !(0.5..1.0).contains(&r) {
            return Err(SpecError::RateOutOfRange { value: r });
        }
        if !(c > 0.0) {
            return Err(SpecError::NonPositiveFloor { value: c });
        }
        Ok(Self { r, c })
    }

    /// Whether the exponent marks an optimal no-regret configuration.
    pub fn is_optimal_rate(&self) -> bool {
        self.r == 0.5
    }
}

/// Declarative description of a strategy; immutable and shareable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrategySpec {
    pub family: StrategyFamily,
    pub schedule: LearningRateSchedule,
    pub recency: RecencySpec,
    /// Constant mixture, `FixedMixture` only.
    pub fixed_q: Option<f64>,
    pub player_role: Player,
}

impl StrategySpec {
    pub fn hedge(r_exp: f64) -> Result<Self, SpecError> {
        Ok(Self {
            family: StrategyFamily::Hedge,
            schedule: LearningRateSchedule::fixed_power(r_exp)?,
            recency: RecencySpec::mean_based(),
            fixed_q: None,
            player_role: Player::One,
        })
    }

    pub fn log_barrier(r_exp: f64) -> Result<Self, SpecError> {
        Ok(Self { family: StrategyFamily::LogBarrier, ..Self::hedge(r_exp)? })
    }

    pub fn optimistic_hedge(r_exp: f64, ell: usize) -> Result<Self, SpecError> {
        Ok(Self { recency: RecencySpec::unit_weights(ell), ..Self::hedge(r_exp)? })
    }

    pub fn adaptive_hedge(c_floor: f64) -> Result<Self, SpecError> {
        Ok(Self {
            family: StrategyFamily::AdaptiveHedge,
            schedule: LearningRateSchedule::adaptive_with_floor(c_floor)?,
            recency: RecencySpec::mean_based(),
            fixed_q: None,
            player_role: Player::One,
        })
    }

    pub fn fixed(q: f64) -> Result<Self, SpecError> {
        if !(0.0..=1.0).contains(&q) {
            return Err(SpecError::MixtureOutOfRange { value: q });
        }
        Ok(Self {
            family: StrategyFamily::FixedMixture,
            schedule: LearningRateSchedule::FixedPower { r_exp: 0.5 },
            recency: RecencySpec::mean_based(),
            fixed_q: Some(q),
            player_role: Player::One,
        })
    }

    pub fn with_role(mut self, role: Player) -> Self {
        self.player_role = role;
        self
    }

    /// How many trailing opponent realizations the statistic needs.
    pub fn ell_max(&self) -> usize {
        self.recency.ell()
    }

    /// Parses a compact descriptor; `role` assigns the board side.
    pub fn parse(descriptor: &str, role: Player) -> Result<Self, SpecError> {
        let descriptor = descriptor.trim();
        if descriptor.is_empty() {
            return Err(SpecError::EmptyDescriptor);
        }
        let (name, args) = match descriptor.split_once(':') {
            Some((n, a)) => (n, a),
            None => (descriptor, ""),
        };
        if !matches!(name, "hedge" | "logbarrier" | "optimistic-hedge" | "adahedge" | "fixed") {
            return Err(SpecError::UnknownFamily(name.to_string()));
        }
        let mut r_exp: Option<f64> = None;
        let mut ell: Option<usize> = None;
        let mut c_floor: Option<f64> = None;
        let mut q: Option<f64> = None;
        for pair in args.split(',').filter(|s| !s.trim().is_empty()) {
            let (key, value) = pair.split_once('=').ok_or_else(|| SpecError::MalformedValue {
                key: pair.trim().to_string(),
                value: String::new(),
            })?;
            let key = key.trim();
            let value = value.trim();
            let malformed = || SpecError::MalformedValue {
                key: key.to_string(),
                value: value.to_string(),
            };
            match (name, key) {
                ("hedge" | "logbarrier" | "optimistic-hedge", "r") => {
                    r_exp = Some(value.parse().map_err(|_| malformed())?);
                }
                ("optimistic-hedge", "ell") => {
                    ell = Some(value.parse().map_err(|_| malformed())?);
                }
                ("adahedge", "C") => {
                    c_floor = Some(value.parse().map_err(|_| malformed())?);
                }
                ("fixed", "q") => {
                    q = Some(value.parse().map_err(|_| malformed())?);
                }
                _ => {
                    return Err(SpecError::UnknownKey {
                        family: name.to_string(),
                        key: key.to_string(),
                    });
                }
            }
        }
        let missing = |key| SpecError::MissingKey { family: name.to_string(), key };
        let spec = match name {
            "hedge" => Self::hedge(r_exp.ok_or_else(|| missing("r"))?)?,
            "logbarrier" => Self::log_barrier(r_exp.ok_or_else(|| missing("r"))?)?,
            "optimistic-hedge" => Self::optimistic_hedge(
                r_exp.ok_or_else(|| missing("r"))?,
                ell.unwrap_or(1),
            )?,
            "adahedge" => Self::adaptive_hedge(c_floor.ok_or_else(|| missing("C"))?)?,
            "fixed" => Self::fixed(q.ok_or_else(|| missing("q"))?)?,
            _ => unreachable!("family validated above"),
        };
        Ok(spec.with_role(role))
    }

    /// Canonical descriptor string; `parse(descriptor(), role)` round-trips.
    pub fn descriptor(&self) -> String {
        match (self.family, &self.schedule) {
            (StrategyFamily::Hedge, LearningRateSchedule::FixedPower { r_exp }) => {
                if self.recency.ell() == 0 {
                    format!("hedge:r={r_exp}")
                } else {
                    format!("optimistic-hedge:r={r_exp},ell={}", self.recency.ell())
                }
            }
            (StrategyFamily::LogBarrier, LearningRateSchedule::FixedPower { r_exp }) => {
                format!("logbarrier:r={r_exp}")
            }
            (StrategyFamily::AdaptiveHedge, LearningRateSchedule::AdaptiveWithFloor { c_floor }) => {
                format!("adahedge:C={c_floor}")
            }
            (StrategyFamily::FixedMixture, _) => {
                format!("fixed:q={}", self.fixed_q.unwrap_or(0.5))
            }
            // Unreachable through the constructors; serialize best-effort.
            (family, schedule) => format!("{family:?}:{schedule:?}"),
        }
    }
}

impl fmt::Display for StrategySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.descriptor())
    }
}

fn clamp_unit<R: Real>(x: R) -> R {
    x.max(R::zero()).min(R::one())
}

/// Numerically stable logistic, clamped to the open unit interval at the
/// representability boundary so outputs are never exactly 0 or 1.
pub fn stable_logistic<R: Real>(x: R) -> R {
    let p = if x >= R::zero() {
        R::one() / (R::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (R::one() + e)
    };
    p.max(R::min_positive_value()).min(R::one_minus_ulp())
}

/// Cumulative-payoff gap `(t-1) * (X(1, stat) - X(0, stat))` for `role`,
/// with the statistic clamped to [0, 1] before payoff evaluation (recency
/// bias can push it above 1).
pub fn cumulative_payoff_gap<R: Real>(
    game: &Game2x2<R>,
    role: Player,
    t: u64,
    statistic: R,
) -> R {
    let stat = clamp_unit(statistic);
    let horizon = R::of((t - 1) as f64);
    horizon * (game.action_payoff(role, 1, stat) - game.action_payoff(role, 0, stat))
}

/// Exponential-weights mixture at an explicit rate: softmax over the two
/// cumulative payoffs, reduced to a logistic of their gap (the two-action
/// log-sum-exp form, immune to overflow).
pub fn hedge_map_at_rate<R: Real>(
    game: &Game2x2<R>,
    role: Player,
    t: u64,
    statistic: R,
    eta: R,
) -> R {
    stable_logistic(eta * cumulative_payoff_gap(game, role, t, statistic))
}

/// Exponential-weights mixture at the schedule's rate for step `t`.
pub fn hedge_map<R: Real>(
    game: &Game2x2<R>,
    role: Player,
    t: u64,
    statistic: R,
    schedule: &LearningRateSchedule,
) -> R {
    hedge_map_at_rate(game, role, t, statistic, R::of(schedule.stateless_eta(t)))
}

/// Root in (0, 1) of `d p^2 + (2 - d) p - 1 = 0`, the first-order condition
/// of log-barrier-regularized leader-following with payoff gap `d = eta *
/// (S1 - S0)`.
///
/// Closed form `p = 2 / (sqrt(d^2 + 4) + 2 - d)`, rationalized on each sign
/// of `d` so no cancellation occurs anywhere, including d = 0 (p = 1/2
/// exactly) and |d| large (p approaches the boundary monotonically).
pub fn log_barrier_root<R: Real>(d: R) -> R {
    let two = R::of(2.0);
    let four = R::of(4.0);
    let s = (d * d + four).sqrt();
    let p = if d > R::zero() {
        // sqrt(d^2+4) - d rewritten as 4 / (sqrt(d^2+4) + d).
        (s + d) / (s + d + two)
    } else {
        two / (s + two - d)
    };
    p.max(R::min_positive_value()).min(R::one_minus_ulp())
}

/// Log-barrier-regularized mixture at the schedule's rate for step `t`.
pub fn log_barrier_map<R: Real>(
    game: &Game2x2<R>,
    role: Player,
    t: u64,
    statistic: R,
    schedule: &LearningRateSchedule,
) -> R {
    let eta = R::of(schedule.stateless_eta(t));
    log_barrier_root(eta * cumulative_payoff_gap(game, role, t, statistic))
}

/// The recency-biased statistic `(z + sum_j r_j * J_(t-j)) / (t - 1)`.
/// Reduces to the unbiased average when `ell = 0`; may exceed 1; terms
/// beyond the recorded history are treated as absent during warm start.
pub fn apply_recency_bias<R: Real>(summary: &HistorySummary, recency: &RecencySpec) -> R {
    if summary.t < 2 {
        return R::of(summary.prior);
    }
    let mut numerator = summary.z;
    for (j, &w) in recency.weights().iter().enumerate() {
        if let Some(true) = summary.recent_back(j + 1) {
            numerator += w as u64;
        }
    }
    R::of(numerator as f64) / R::of((summary.t - 1) as f64)
}

/// Constant mixture, independent of history.
pub fn fixed_mixture_map<R: Real>(q: R) -> Result<R, SpecError> {
    if q >= R::zero() && q <= R::one() {
        Ok(q)
    } else {
        Err(SpecError::MixtureOutOfRange { value: q.as_f64() })
    }
}

/// Hedge on matching pennies at rate exactly `C/sqrt(t)` applied to the
/// unbiased empirical average: the reference iterate that adaptive variants
/// must dominate in deviation from 1/2.
pub fn counterfactual_hedge_iterate(summary: &HistorySummary, c: f64) -> f64 {
    assert!(summary.t() >= 2, "counterfactual iterate needs at least one observation");
    let t = summary.t();
    // Matching pennies, role 1: payoff gap is 2z - (t-1), an exact integer.
    let gap = 2.0 * summary.z() as f64 - (t - 1) as f64;
    let eta = c / (t as f64).sqrt();
    stable_logistic(eta * gap)
}

/// Mutable per-run state: the history summary plus the adaptive schedule's
/// running loss-range statistic.
#[derive(Clone, Debug)]
pub struct StrategyState {
    spec: StrategySpec,
    summary: HistorySummary,
    gap_abs_max: f64,
    last_eta: f64,
}

impl StrategyState {
    pub fn new(spec: StrategySpec) -> Self {
        let ell_max = spec.ell_max();
        Self {
            spec,
            summary: HistorySummary::new(ell_max),
            gap_abs_max: 0.0,
            last_eta: f64::NAN,
        }
    }

    pub fn spec(&self) -> &StrategySpec {
        &self.spec
    }

    pub fn summary(&self) -> &HistorySummary {
        &self.summary
    }

    /// Effective learning rate used by the most recent mixture computation.
    pub fn last_eta(&self) -> f64 {
        self.last_eta
    }

    pub fn record_opponent(&mut self, bit: bool) {
        self.summary.record(bit);
    }

    /// Mixed action for the current step given everything observed so far.
    pub fn mixture(&mut self, game: &Game2x2<f64>) -> f64 {
        let t = self.summary.t();
        let role = self.spec.player_role;
        let stat: f64 = apply_recency_bias(&self.summary, &self.spec.recency);
        match self.spec.family {
            StrategyFamily::FixedMixture => self.spec.fixed_q.expect("fixed family carries q"),
            StrategyFamily::Hedge => {
                self.last_eta = self.spec.schedule.stateless_eta(t);
                hedge_map(game, role, t, stat, &self.spec.schedule)
            }
            StrategyFamily::LogBarrier => {
                self.last_eta = self.spec.schedule.stateless_eta(t);
                log_barrier_map(game, role, t, stat, &self.spec.schedule)
            }
            StrategyFamily::AdaptiveHedge => adaptive_hedge_step(self, game),
        }
    }
}

/// One adaptive-hedge evaluation: propose a rate by a doubling trick on the
/// observed cumulative payoff-gap range, enforce the `C/sqrt(t)` floor, and
/// return the hedge mixture at the effective rate.
pub fn adaptive_hedge_step(state: &mut StrategyState, game: &Game2x2<f64>) -> f64 {
    let c_floor = match state.spec.schedule {
        LearningRateSchedule::AdaptiveWithFloor { c_floor } => c_floor,
        // An adaptive step with a fixed schedule degenerates to plain hedge.
        LearningRateSchedule::FixedPower { .. } => {
            let t = state.summary.t();
            let stat: f64 = apply_recency_bias(&state.summary, &state.spec.recency);
            state.last_eta = state.spec.schedule.stateless_eta(t);
            return hedge_map(game, state.spec.player_role, t, stat, &state.spec.schedule);
        }
    };
    let t = state.summary.t();
    let stat: f64 = apply_recency_bias(&state.summary, &state.spec.recency);
    let gap = cumulative_payoff_gap(game, state.spec.player_role, t, stat);
    state.gap_abs_max = state.gap_abs_max.max(gap.abs());
    // Doubling trick: halve the proposal each time the observed range
    // doubles, i.e. eta = 2^-ceil(log2(range)) for range > 1.
    let proposed = if state.gap_abs_max <= 1.0 {
        1.0
    } else {
        (2.0f64).powi(-state.gap_abs_max.log2().ceil() as i32)
    };
    let floor = c_floor / (t as f64).sqrt();
    let eta = proposed.max(floor);
    assert!(eta >= floor, "adaptive rate must stay at or above its floor");
    state.last_eta = eta;
    stable_logistic(eta * gap)
}

/// History-free evaluation of a spec's map at an explicit statistic; used
/// by the monotonicity guard and the telepathic dynamics. Adaptive specs
/// evaluate at their floor rate (the direction of the map is
/// rate-independent).
pub fn map_at_statistic(
    spec: &StrategySpec,
    game: &Game2x2<f64>,
    role: Player,
    t: u64,
    statistic: f64,
) -> f64 {
    match spec.family {
        StrategyFamily::FixedMixture => spec.fixed_q.expect("fixed family carries q"),
        StrategyFamily::Hedge | StrategyFamily::AdaptiveHedge => {
            hedge_map(game, role, t, statistic, &spec.schedule)
        }
        StrategyFamily::LogBarrier => log_barrier_map(game, role, t, statistic, &spec.schedule),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Monotonicity {
    NonDecreasing,
    NonIncreasing,
    NonMonotone,
}

/// Classifies the direction of a strategy map on a uniform statistic grid.
/// Constant maps report `NonDecreasing` by convention.
pub fn monotonicity_check(
    spec: &StrategySpec,
    game: &Game2x2<f64>,
    role: Player,
    t: u64,
    grid_size: usize,
) -> Monotonicity {
    assert!(grid_size >= 3, "a direction needs at least three grid points");
    // Guard against sub-ulp wiggle in the math library, far below any
    // genuine direction reversal.
    let eps = 1e-14;
    let values: Vec<f64> = (0..grid_size)
        .map(|i| {
            let stat = i as f64 / (grid_size - 1) as f64;
            map_at_statistic(spec, game, role, t, stat)
        })
        .collect();
    let diffs: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    if diffs.iter().all(|&d| d >= -eps) {
        Monotonicity::NonDecreasing
    } else if diffs.iter().all(|&d| d <= eps) {
        Monotonicity::NonIncreasing
    } else {
        Monotonicity::NonMonotone
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::make_matching_pennies;

    #[test]
    fn summary_counts_and_ring_buffer() {
        let mut s = HistorySummary::new(2);
        assert_eq!(s.t(), 1);
        assert_eq!(s.q_hat(), 0.5);
        for bit in [true, false, true, true] {
            s.record(bit);
        }
        assert_eq!(s.t(), 5);
        assert_eq!(s.z(), 3);
        assert_eq!(s.q_hat(), 0.75);
        assert_eq!(s.recent_back(1), Some(true));
        assert_eq!(s.recent_back(2), Some(true));
        assert_eq!(s.recent_back(3), None);
    }

    #[test]
    fn hedge_is_symmetric_at_half() {
        let game = make_matching_pennies::<f64>();
        let schedule = LearningRateSchedule::fixed_power(0.5).unwrap();
        for t in [1, 2, 10, 1000, 1_000_000] {
            assert_eq!(hedge_map(&game, Player::One, t, 0.5, &schedule), 0.5);
        }
    }

    #[test]
    fn logistic_stays_interior() {
        for x in [-1e9f64, -745.0, -1.0, 0.0, 1.0, 745.0, 1e9] {
            let p = stable_logistic(x);
            assert!(p > 0.0 && p < 1.0, "x = {x} gave {p}");
        }
    }

    #[test]
    fn descriptor_round_trips() {
        for d in [
            "hedge:r=0.5",
            "hedge:r=0.7",
            "logbarrier:r=0.5",
            "optimistic-hedge:r=0.5,ell=1",
            "optimistic-hedge:r=0.5,ell=3",
            "adahedge:C=1",
            "fixed:q=0.5",
        ] {
            let spec = StrategySpec::parse(d, Player::Two).unwrap();
            assert_eq!(spec.descriptor(), d);
            assert_eq!(StrategySpec::parse(&spec.descriptor(), Player::Two).unwrap(), spec);
        }
    }

    #[test]
    fn adaptive_step_with_fixed_schedule_degenerates_to_hedge() {
        let game = make_matching_pennies::<f64>();
        let mut adaptive = StrategyState::new(StrategySpec::hedge(0.5).unwrap());
        let mut plain = StrategyState::new(StrategySpec::hedge(0.5).unwrap());
        for bit in [true, true, false, true] {
            adaptive.record_opponent(bit);
            plain.record_opponent(bit);
        }
        let direct = adaptive_hedge_step(&mut adaptive, &game);
        assert_eq!(direct, plain.mixture(&game));
    }
}
