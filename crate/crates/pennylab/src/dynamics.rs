//! Repeated-play loops: realization feedback (sampled actions), telepathic
//! feedback (exchanged mixtures), scripted opponents, and seeded parallel
//! ensembles.
//!
//! Determinism contract: a realization run is a pure function of (setup,
//! seed); a telepathic run of the setup alone. Each player draws from an
//! independent substream of the run seed, so changing one player's strategy
//! never perturbs the other's draws. Ensemble replica `i` uses the seed
//! `mix_seed(master_seed, i)`.

use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::format_float17;
use crate::games::{nash_equilibrium, Game2x2, Player};
use crate::numeric::Kahan;
use crate::pmf::Pmf;
use crate::strategies::{stable_logistic, StrategyFamily, StrategySpec, StrategyState};

/// What the players observe about each other.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FeedbackMode {
    /// Sampled actions; stochastic given the seed.
    Realization,
    /// Exchanged mixed strategies; fully deterministic.
    Telepathic,
}

/// Snapshot of the run state at a checkpoint step.
///
/// In realization mode `p_hat`/`q_hat` are empirical action frequencies
/// (`q_hat * t` is an integer) and `z_t` the player-2 action-1 count. In
/// telepathic mode there are no realizations: the hat fields equal the bar
/// fields and `z_t = t * q_bar`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CheckpointRecord {
    pub t: u64,
    pub p_t: f64,
    pub q_t: f64,
    pub p_hat: f64,
    pub q_hat: f64,
    pub p_bar: f64,
    pub q_bar: f64,
    pub cum_payoff_1: f64,
    pub cum_payoff_2: f64,
    pub z_t: f64,
}

/// Geometric checkpoint schedule `floor(base * ratio^k)`, deduplicated,
/// plus the final step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CheckpointSchedule {
    base: f64,
    ratio: f64,
}

impl CheckpointSchedule {
    pub fn geometric(base: f64, ratio: f64) -> Self {
        assert!(base >= 1.0 && ratio > 1.0, "schedule needs base >= 1 and ratio > 1");
        Self { base, ratio }
    }

    pub fn points(&self, steps: u64) -> Vec<u64> {
        let mut out: Vec<u64> = Vec::new();
        let mut k = 0i32;
        loop {
            let v = self.base * self.ratio.powi(k);
            if v > steps as f64 {
                break;
            }
            let t = v as u64;
            if t >= 1 && out.last() != Some(&t) {
                out.push(t);
            }
            k += 1;
        }
        if out.last() != Some(&steps) {
            out.push(steps);
        }
        out
    }
}

impl Default for CheckpointSchedule {
    fn default() -> Self {
        Self::geometric(10.0, 1.25)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DynamicsOptions {
    pub schedule: CheckpointSchedule,
    /// Trailing steps kept at full resolution (mixtures and realized bits);
    /// set to the horizon for full-resolution audit runs.
    pub tail_window: usize,
    /// Step-1 mixture override for telepathic runs, each coordinate in
    /// (0, 1). The centered profile (1/2, 1/2) is an exact fixed point of
    /// the mixture-feedback dynamic, so cycling only shows up from an
    /// off-center start; sampled runs break the symmetry on their own and
    /// ignore this.
    pub telepathic_start: Option<(f64, f64)>,
    /// Which deterministic update telepathic runs iterate.
    pub telepathic_update: TelepathicUpdate,
}

impl Default for DynamicsOptions {
    fn default() -> Self {
        Self {
            schedule: CheckpointSchedule::default(),
            tail_window: 10_000,
            telepathic_start: None,
            telepathic_update: TelepathicUpdate::MeanBased,
        }
    }
}

/// Update rule for telepathic (mixture-feedback) runs.
///
/// The two rules agree when the learning rate is constant. Under a decaying
/// rate they split: the mean-based map rescales the whole payoff history by
/// the current rate, which damps its self-play orbits toward the
/// equilibrium, while the incremental rule locks each step's contribution
/// at the rate in force when it happened, and its self-play orbits settle
/// into a persistent cycle.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum TelepathicUpdate {
    /// Replay the strategy map on the running mean of the opponent's
    /// mixtures. Canonical here: directly comparable with realization runs.
    #[default]
    MeanBased,
    /// Classic multiplicative weights: log-weights accumulate
    /// `eta_t * (payoff gap)` step by step. Plain hedge only.
    Incremental,
}

/// Opponent realization source that ignores player 1's play.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum OpponentScript {
    IidBernoulli(f64),
    /// I.i.d. Bernoulli(q_star) for steps `1..=t_total - s_tail`, then the
    /// constant `tail_value` for the last `s_tail` steps.
    PiecewiseProp1 { q_star: f64, t_total: u64, s_tail: u64, tail_value: bool },
}

impl OpponentScript {
    /// The step-t action-1 probability.
    pub fn mean_at(&self, t: u64) -> f64 {
        match *self {
            Self::IidBernoulli(q) => q,
            Self::PiecewiseProp1 { q_star, t_total, s_tail, tail_value } => {
                if t + s_tail <= t_total {
                    q_star
                } else {
                    tail_value as u64 as f64
                }
            }
        }
    }

    fn draw(&self, t: u64, rng: &mut ChaCha12Rng) -> bool {
        match *self {
            Self::IidBernoulli(q) => rng.gen::<f64>() < q,
            Self::PiecewiseProp1 { q_star, t_total, s_tail, tail_value } => {
                if t + s_tail <= t_total {
                    rng.gen::<f64>() < q_star
                } else {
                    tail_value
                }
            }
        }
    }
}

/// Player 2's side of a run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum RunKind {
    /// Both players sample actions.
    Realization { spec2: StrategySpec },
    /// Both players observe mixtures; deterministic.
    Telepathic { spec2: StrategySpec },
    /// Player 2's realizations come from a script.
    VsScript { script: OpponentScript },
    /// Player 2 plays the opposite of player 1's previous realization,
    /// treating the move before the game as action 1 (so its own first move
    /// is action 0). A regret-audit adversary.
    VsOppositeAdversary,
}

impl RunKind {
    pub fn mode(&self) -> FeedbackMode {
        match self {
            RunKind::Telepathic { .. } => FeedbackMode::Telepathic,
            _ => FeedbackMode::Realization,
        }
    }
}

/// Full description of a single run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunSetup {
    pub game: Game2x2<f64>,
    pub spec1: StrategySpec,
    pub kind: RunKind,
    pub steps: u64,
    pub opts: DynamicsOptions,
}

/// Last `tail_window` steps at full resolution. `i_bits`/`j_bits` are empty
/// in telepathic mode. The `evicted_payoff_*` fields hold the cumulative
/// realized payoffs over the steps that fell out of the window, so
/// `evicted + sum(window)` must reproduce the final cumulative payoffs.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailWindow {
    pub start_t: u64,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub i_bits: Vec<u8>,
    pub j_bits: Vec<u8>,
    pub evicted_payoff_1: f64,
    pub evicted_payoff_2: f64,
}

impl TailWindow {
    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }
}

/// Player-2 mixture visits to the interval `[q*/2, (q*+1)/2]`, maintained
/// online over every step (not just checkpoints).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NeighborhoodCount {
    pub q_star: f64,
    pub steps_inside: u64,
}

/// Output of one run: checkpoints, the full-resolution tail, and the online
/// accumulators the probes need.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    pub setup: RunSetup,
    pub mode: FeedbackMode,
    pub seed: Option<u64>,
    pub checkpoints: Vec<CheckpointRecord>,
    pub tail: TailWindow,
    /// The mixture player 1 would play at step `steps + 1`: its map applied
    /// to the complete observed history.
    pub next_mixture_1: f64,
    pub next_mixture_2: Option<f64>,
    /// Sum over steps of `Q_t (1 - Q_t)`.
    pub sum_q_var: f64,
    /// Sum over steps of `P_t (1 - P_t)`.
    pub sum_p_var: f64,
    pub neighborhood: Option<NeighborhoodCount>,
}

impl Trajectory {
    pub fn final_checkpoint(&self) -> &CheckpointRecord {
        self.checkpoints.last().expect("every run records its final step")
    }

    /// Writes the checkpoint series as CSV (17-significant-digit floats).
    pub fn write_checkpoints_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,p_t,q_t,p_hat,q_hat,p_bar,q_bar,payoff1,payoff2")?;
        for c in &self.checkpoints {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{}",
                c.t,
                format_float17(c.p_t),
                format_float17(c.q_t),
                format_float17(c.p_hat),
                format_float17(c.q_hat),
                format_float17(c.p_bar),
                format_float17(c.q_bar),
                format_float17(c.cum_payoff_1),
                format_float17(c.cum_payoff_2),
            )?;
        }
        Ok(())
    }
}

/// SplitMix64-style seed derivation for replica `index` of an ensemble;
/// injective in the index for a fixed master seed.
pub fn mix_seed(master_seed: u64, index: u64) -> u64 {
    let mut z = master_seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

// Rotating full-resolution recorder for the last W steps.
struct TailRecorder {
    cap: usize,
    filled: usize,
    head: usize,
    last_t: u64,
    p: Vec<f64>,
    q: Vec<f64>,
    i_bits: Vec<u8>,
    j_bits: Vec<u8>,
    evicted_1: Kahan,
    evicted_2: Kahan,
}

impl TailRecorder {
    fn new(cap: usize) -> Self {
        Self {
            cap,
            filled: 0,
            head: 0,
            last_t: 0,
            p: vec![0.0; cap],
            q: vec![0.0; cap],
            i_bits: vec![0; cap],
            j_bits: vec![0; cap],
            evicted_1: Kahan::new(),
            evicted_2: Kahan::new(),
        }
    }

    fn push(&mut self, game: &Game2x2<f64>, t: u64, p: f64, q: f64, i: bool, j: bool) {
        if self.cap == 0 {
            self.last_t = t;
            return;
        }
        if self.filled == self.cap {
            let (oi, oj) = (self.i_bits[self.head] as usize, self.j_bits[self.head] as usize);
            self.evicted_1.add(game.g[oi][oj]);
            self.evicted_2.add(game.h[oi][oj]);
        }
        self.p[self.head] = p;
        self.q[self.head] = q;
        self.i_bits[self.head] = i as u8;
        self.j_bits[self.head] = j as u8;
        self.head = (self.head + 1) % self.cap;
        self.filled = self.filled.min(self.cap - 1) + 1;
        self.last_t = t;
    }

    fn into_window(self, has_bits: bool) -> TailWindow {
        let n = self.filled;
        let mut p = Vec::with_capacity(n);
        let mut q = Vec::with_capacity(n);
        let mut i_bits = Vec::with_capacity(if has_bits { n } else { 0 });
        let mut j_bits = Vec::with_capacity(if has_bits { n } else { 0 });
        for k in 0..n {
            // Oldest entry sits at `head` once the ring is full.
            let idx = (self.head + self.cap - n + k) % self.cap.max(1);
            p.push(self.p[idx]);
            q.push(self.q[idx]);
            if has_bits {
                i_bits.push(self.i_bits[idx]);
                j_bits.push(self.j_bits[idx]);
            }
        }
        TailWindow {
            start_t: self.last_t + 1 - n as u64,
            p,
            q,
            i_bits,
            j_bits,
            evicted_payoff_1: self.evicted_1.value(),
            evicted_payoff_2: self.evicted_2.value(),
        }
    }
}

// Shared per-step bookkeeping for every run flavor.
struct Accumulators {
    p_sum: Kahan,
    q_sum: Kahan,
    pay1: Kahan,
    pay2: Kahan,
    p_var: Kahan,
    q_var: Kahan,
    i_count: u64,
    j_count: u64,
    inside: u64,
    band: Option<(f64, f64, f64)>, // (q_star, lo, hi)
}

impl Accumulators {
    fn new(game: &Game2x2<f64>) -> Self {
        let band = nash_equilibrium(game).ok().map(|eq| {
            (eq.q_star, eq.q_star / 2.0, (eq.q_star + 1.0) / 2.0)
        });
        Self {
            p_sum: Kahan::new(),
            q_sum: Kahan::new(),
            pay1: Kahan::new(),
            pay2: Kahan::new(),
            p_var: Kahan::new(),
            q_var: Kahan::new(),
            i_count: 0,
            j_count: 0,
            inside: 0,
            band,
        }
    }

    fn step_mixtures(&mut self, p: f64, q: f64) {
        self.p_sum.add(p);
        self.q_sum.add(q);
        self.p_var.add(p * (1.0 - p));
        self.q_var.add(q * (1.0 - q));
        if let Some((_, lo, hi)) = self.band {
            if q >= lo && q <= hi {
                self.inside += 1;
            }
        }
    }

    fn checkpoint_realization(&self, t: u64) -> CheckpointRecord {
        let tf = t as f64;
        CheckpointRecord {
            t,
            p_t: 0.0,
            q_t: 0.0,
            p_hat: self.i_count as f64 / tf,
            q_hat: self.j_count as f64 / tf,
            p_bar: self.p_sum.value() / tf,
            q_bar: self.q_sum.value() / tf,
            cum_payoff_1: self.pay1.value(),
            cum_payoff_2: self.pay2.value(),
            z_t: self.j_count as f64,
        }
    }

    fn neighborhood(&self) -> Option<NeighborhoodCount> {
        self.band.map(|(q_star, _, _)| NeighborhoodCount {
            q_star,
            steps_inside: self.inside,
        })
    }
}

/// Runs the repeated game described by `setup`. The seed is ignored by
/// telepathic runs.
pub fn run(setup: &RunSetup, seed: u64) -> Trajectory {
    assert!(setup.steps >= 1, "a run needs at least one step");
    match &setup.kind {
        RunKind::Telepathic { .. } => run_telepathic_impl(setup),
        _ => run_sampled(setup, seed),
    }
}

/// Both players sample actions from their mixtures.
pub fn run_realization(
    game: &Game2x2<f64>,
    spec1: &StrategySpec,
    spec2: &StrategySpec,
    steps: u64,
    seed: u64,
    opts: &DynamicsOptions,
) -> Trajectory {
    run(
        &RunSetup {
            game: *game,
            spec1: spec1.clone(),
            kind: RunKind::Realization { spec2: spec2.clone() },
            steps,
            opts: *opts,
        },
        seed,
    )
}

/// Both players observe each other's mixtures; no sampling anywhere.
pub fn run_telepathic(
    game: &Game2x2<f64>,
    spec1: &StrategySpec,
    spec2: &StrategySpec,
    steps: u64,
    opts: &DynamicsOptions,
) -> Trajectory {
    run(
        &RunSetup {
            game: *game,
            spec1: spec1.clone(),
            kind: RunKind::Telepathic { spec2: spec2.clone() },
            steps,
            opts: *opts,
        },
        0,
    )
}

/// Player 2's realizations come from the script; player 1 learns normally.
pub fn run_vs_script(
    game: &Game2x2<f64>,
    spec1: &StrategySpec,
    script: OpponentScript,
    steps: u64,
    seed: u64,
    opts: &DynamicsOptions,
) -> Trajectory {
    run(
        &RunSetup {
            game: *game,
            spec1: spec1.clone(),
            kind: RunKind::VsScript { script },
            steps,
            opts: *opts,
        },
        seed,
    )
}

// Realization-feedback flavors (strategy, script, or adaptive adversary).
fn run_sampled(setup: &RunSetup, seed: u64) -> Trajectory {
    let game = &setup.game;
    let steps = setup.steps;
    let mut rng1 = ChaCha12Rng::seed_from_u64(seed);
    rng1.set_stream(1);
    let mut rng2 = ChaCha12Rng::seed_from_u64(seed);
    rng2.set_stream(2);

    let mut s1 = StrategyState::new(setup.spec1.clone().with_role(Player::One));
    let mut s2 = match &setup.kind {
        RunKind::Realization { spec2 } => {
            Some(StrategyState::new(spec2.clone().with_role(Player::Two)))
        }
        _ => None,
    };

    let mut acc = Accumulators::new(game);
    let mut tail = TailRecorder::new(setup.opts.tail_window.min(steps as usize));
    let cps = setup.opts.schedule.points(steps);
    let mut cp_idx = 0usize;
    let mut records = Vec::with_capacity(cps.len());
    let mut prev_i = true; // the opposite adversary's fictitious step-0 observation

    for t in 1..=steps {
        let p = s1.mixture(game);
        let (q, j) = match &setup.kind {
            RunKind::Realization { .. } => {
                let q = s2.as_mut().expect("realization kind has a second player").mixture(game);
                (q, rng2.gen::<f64>() < q)
            }
            RunKind::VsScript { script } => (script.mean_at(t), script.draw(t, &mut rng2)),
            RunKind::VsOppositeAdversary => {
                let j = !prev_i;
                (j as u64 as f64, j)
            }
            RunKind::Telepathic { .. } => unreachable!("telepathic runs use their own loop"),
        };
        let i = rng1.gen::<f64>() < p;

        acc.step_mixtures(p, q);
        acc.i_count += i as u64;
        acc.j_count += j as u64;
        acc.pay1.add(game.g[i as usize][j as usize]);
        acc.pay2.add(game.h[i as usize][j as usize]);
        tail.push(game, t, p, q, i, j);

        s1.record_opponent(j);
        if let Some(s2) = s2.as_mut() {
            s2.record_opponent(i);
        }
        prev_i = i;

        if cp_idx < cps.len() && cps[cp_idx] == t {
            let mut rec = acc.checkpoint_realization(t);
            rec.p_t = p;
            rec.q_t = q;
            records.push(rec);
            cp_idx += 1;
        }
    }

    let next_mixture_1 = s1.mixture(game);
    let next_mixture_2 = s2.as_mut().map(|s| s.mixture(game));
    Trajectory {
        setup: setup.clone(),
        mode: FeedbackMode::Realization,
        seed: Some(seed),
        checkpoints: records,
        tail: tail.into_window(true),
        next_mixture_1,
        next_mixture_2,
        sum_q_var: acc.q_var.value(),
        sum_p_var: acc.p_var.value(),
        neighborhood: acc.neighborhood(),
    }
}

// Telepathic side of a player: the statistic is the (possibly
// recency-biased) running average of the opponent's mixtures.
struct TelepathicPlayer {
    spec: StrategySpec,
    mix_sum: Kahan,
    recent: std::collections::VecDeque<f64>,
    seen: u64,
    gap_abs_max: f64,
}

impl TelepathicPlayer {
    fn new(spec: StrategySpec) -> Self {
        Self {
            spec,
            mix_sum: Kahan::new(),
            recent: std::collections::VecDeque::new(),
            seen: 0,
            gap_abs_max: 0.0,
        }
    }

    fn statistic(&self) -> f64 {
        if self.seen == 0 {
            return 0.5;
        }
        let mut numerator = self.mix_sum.value();
        for (j, &w) in self.spec.recency.weights().iter().enumerate() {
            if j < self.recent.len() {
                numerator += w as f64 * self.recent[self.recent.len() - 1 - j];
            }
        }
        numerator / self.seen as f64
    }

    fn mixture(&mut self, game: &Game2x2<f64>, t: u64) -> f64 {
        let stat = self.statistic();
        let role = self.spec.player_role;
        match self.spec.family {
            StrategyFamily::AdaptiveHedge => {
                let gap = crate::strategies::cumulative_payoff_gap(game, role, t, stat);
                self.gap_abs_max = self.gap_abs_max.max(gap.abs());
                let c_floor = match self.spec.schedule {
                    crate::strategies::LearningRateSchedule::AdaptiveWithFloor { c_floor } => c_floor,
                    _ => unreachable!("adaptive family carries an adaptive schedule"),
                };
                let proposed = if self.gap_abs_max <= 1.0 {
                    1.0
                } else {
                    (2.0f64).powi(-self.gap_abs_max.log2().ceil() as i32)
                };
                let eta = proposed.max(c_floor / (t as f64).sqrt());
                crate::strategies::stable_logistic(eta * gap)
            }
            _ => crate::strategies::map_at_statistic(&self.spec, game, role, t, stat),
        }
    }

    fn observe(&mut self, opponent_mixture: f64) {
        self.mix_sum.add(opponent_mixture);
        self.seen += 1;
        let ell = self.spec.ell_max();
        if ell > 0 {
            if self.recent.len() == ell {
                self.recent.pop_front();
            }
            self.recent.push_back(opponent_mixture);
        }
    }
}

fn run_telepathic_impl(setup: &RunSetup) -> Trajectory {
    let game = &setup.game;
    let steps = setup.steps;
    let spec2 = match &setup.kind {
        RunKind::Telepathic { spec2 } => spec2,
        _ => unreachable!(),
    };
    let mut s1 = TelepathicPlayer::new(setup.spec1.clone().with_role(Player::One));
    let mut s2 = TelepathicPlayer::new(spec2.clone().with_role(Player::Two));

    if let Some((p1, q1)) = setup.opts.telepathic_start {
        assert!(
            p1 > 0.0 && p1 < 1.0 && q1 > 0.0 && q1 < 1.0,
            "telepathic start mixtures must be interior, got ({p1}, {q1})"
        );
    }
    let incremental = setup.opts.telepathic_update == TelepathicUpdate::Incremental;
    if incremental {
        let plain_hedge =
            |s: &StrategySpec| s.family == StrategyFamily::Hedge && s.recency.ell() == 0;
        assert!(
            plain_hedge(&setup.spec1) && plain_hedge(spec2),
            "the incremental telepathic update is defined for plain hedge only"
        );
    }
    // Log-weight gaps (action 1 minus action 0) for the incremental rule.
    let (mut y1, mut y2) = (0.0f64, 0.0f64);

    let mut acc = Accumulators::new(game);
    let mut tail = TailRecorder::new(setup.opts.tail_window.min(steps as usize));
    let cps = setup.opts.schedule.points(steps);
    let mut cp_idx = 0usize;
    let mut records = Vec::with_capacity(cps.len());

    for t in 1..=steps {
        let (p, q) = if let (1, Some(start)) = (t, setup.opts.telepathic_start) {
            start
        } else if incremental {
            (stable_logistic(y1), stable_logistic(y2))
        } else {
            (s1.mixture(game, t), s2.mixture(game, t))
        };

        acc.step_mixtures(p, q);
        // Expected payoffs of the mixture profile.
        let pay1 = (1.0 - p) * ((1.0 - q) * game.g[0][0] + q * game.g[0][1])
            + p * ((1.0 - q) * game.g[1][0] + q * game.g[1][1]);
        let pay2 = (1.0 - p) * ((1.0 - q) * game.h[0][0] + q * game.h[0][1])
            + p * ((1.0 - q) * game.h[1][0] + q * game.h[1][1]);
        acc.pay1.add(pay1);
        acc.pay2.add(pay2);
        tail.push(game, t, p, q, false, false);

        s1.observe(q);
        s2.observe(p);
        if incremental {
            let gap1 = game.action_payoff(Player::One, 1, q) - game.action_payoff(Player::One, 0, q);
            let gap2 = game.action_payoff(Player::Two, 1, p) - game.action_payoff(Player::Two, 0, p);
            y1 += setup.spec1.schedule.stateless_eta(t) * gap1;
            y2 += spec2.schedule.stateless_eta(t) * gap2;
        }

        if cp_idx < cps.len() && cps[cp_idx] == t {
            let tf = t as f64;
            let p_bar = acc.p_sum.value() / tf;
            let q_bar = acc.q_sum.value() / tf;
            records.push(CheckpointRecord {
                t,
                p_t: p,
                q_t: q,
                p_hat: p_bar,
                q_hat: q_bar,
                p_bar,
                q_bar,
                cum_payoff_1: acc.pay1.value(),
                cum_payoff_2: acc.pay2.value(),
                z_t: tf * q_bar,
            });
            cp_idx += 1;
        }
    }

    let (next_mixture_1, next_mixture_2) = if incremental {
        (stable_logistic(y1), Some(stable_logistic(y2)))
    } else {
        (s1.mixture(game, steps + 1), Some(s2.mixture(game, steps + 1)))
    };
    Trajectory {
        setup: setup.clone(),
        mode: FeedbackMode::Telepathic,
        seed: None,
        checkpoints: records,
        tail: tail.into_window(false),
        next_mixture_1,
        next_mixture_2,
        sum_q_var: acc.q_var.value(),
        sum_p_var: acc.p_var.value(),
        neighborhood: acc.neighborhood(),
    }
}

/// Runs `n_runs` independent replicas with seeds `mix_seed(master_seed, i)`,
/// in parallel, output ordered by replica index.
pub fn monte_carlo(setup: &RunSetup, n_runs: u64, master_seed: u64) -> Vec<Trajectory> {
    ensemble_map(n_runs, master_seed, |_, seed| run(setup, seed))
}

/// Parallel map over replica indices with derived seeds; results come back
/// in index order regardless of scheduling.
pub fn ensemble_map<T: Send>(
    n_runs: u64,
    master_seed: u64,
    f: impl Fn(u64, u64) -> T + Sync,
) -> Vec<T> {
    (0..n_runs)
        .into_par_iter()
        .map(|i| f(i, mix_seed(master_seed, i)))
        .collect()
}

/// Exact law of player 2's action-1 count after `t` steps of realization
/// play, by enumeration of all 4^t joint realization paths. Exponential
/// reference implementation for cross-checking sampled histograms.
pub fn exact_count_distribution(
    game: &Game2x2<f64>,
    spec1: &StrategySpec,
    spec2: &StrategySpec,
    t: u64,
) -> Pmf<f64> {
    assert!(t <= 10, "path enumeration is 4^t");
    let mut acc = vec![Kahan::new(); t as usize + 1];
    let s1 = StrategyState::new(spec1.clone().with_role(Player::One));
    let s2 = StrategyState::new(spec2.clone().with_role(Player::Two));
    walk_paths(game, s1, s2, t, 1.0, 0, &mut acc);
    let masses = acc.into_iter().map(|k| k.value()).collect();
    Pmf::new(0, masses).expect("path probabilities sum to 1")
}

fn walk_paths(
    game: &Game2x2<f64>,
    mut s1: StrategyState,
    mut s2: StrategyState,
    remaining: u64,
    prob: f64,
    z: usize,
    acc: &mut Vec<Kahan>,
) {
    if remaining == 0 {
        acc[z].add(prob);
        return;
    }
    let p = s1.mixture(game);
    let q = s2.mixture(game);
    for i in [false, true] {
        for j in [false, true] {
            let w = (if i { p } else { 1.0 - p }) * (if j { q } else { 1.0 - q });
            if w == 0.0 {
                continue;
            }
            let mut n1 = s1.clone();
            let mut n2 = s2.clone();
            n1.record_opponent(j);
            n2.record_opponent(i);
            walk_paths(game, n1, n2, remaining - 1, prob * w, z + j as usize, acc);
        }
    }
}
