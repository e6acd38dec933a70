//! Exact probability-mass-function machinery for realization counts:
//! binomial and Poisson-binomial pmfs, shifted and mixture binomials, local
//! normal-approximation certificates, windowed pmf-ratio bounds, and the
//! zero-sum-deviation extremizer search.
//!
//! Everything here is pure and exact up to floating-point rounding; the only
//! sampling-based operation is [`shaky_hands_estimate`], which compares an
//! empirical realization-count histogram against these exact models.

use serde::Serialize;
use thiserror::Error;

use crate::numeric::{normal_pdf, Kahan};
use crate::scalar::Real;

#[derive(Debug, Error, PartialEq)]
pub enum PmfError {
    #[error("probability out of range: {value}")]
    InvalidProbability { value: f64 },
    #[error("negative mass {mass} at support point {z}")]
    NegativeMass { z: i64, mass: f64 },
    #[error("masses must sum to 1 (got {sum})")]
    UnnormalizedMasses { sum: f64 },
    #[error("pmf must have at least one support point")]
    Empty,
    #[error("shift s = {s} exceeds trial count t = {t}")]
    ShiftTooLarge { s: u64, t: u64 },
    #[error("mixture size n = {n} must be even and at most t = {t}")]
    BadMixtureSize { n: u64, t: u64 },
    #[error("mixture parameters leave [0, 1]: q_bar = {q_bar}, delta = {delta}")]
    MixtureOutOfRange { q_bar: f64, delta: f64 },
    #[error("window [{lo}, {hi}] contains no usable support points")]
    EmptyWindow { lo: f64, hi: f64 },
    #[error("deviation grid needs an odd level count >= 3 (got {levels})")]
    BadGrid { levels: u32 },
    #[error("exhaustive deviation search supports 1 <= t <= 8 (got {t})")]
    ExtremizerUnsupported { t: u64 },
    #[error("target count z = {z} outside support 0..={t}")]
    TargetOutsideSupport { z: u64, t: u64 },
    #[error("window needs expected bin counts > 20; increase runs to at least {required_runs}")]
    Undersampled { required_runs: u64 },
    #[error("operation needs realization-mode dynamics")]
    NeedsRealizations,
    #[error("game has no completely mixed equilibrium")]
    NotCompetitive,
}

// Masses smaller than this are treated as zero when forming ratios; the
// windows used by the checks stay far away from such tails.
const RATIO_UNDERFLOW: f64 = 1e-300;

/// A probability mass function on a contiguous integer support.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Pmf<R: Real = f64> {
    support_offset: i64,
    masses: Vec<R>,
}

impl<R: Real> Pmf<R> {
    /// Validates non-negativity and total mass 1 (within 1e-10 in `f64`;
    /// the tolerance widens for scalars with fewer digits).
    pub fn new(support_offset: i64, masses: Vec<R>) -> Result<Self, PmfError> {
        if masses.is_empty() {
            return Err(PmfError::Empty);
        }
        let mut sum = Kahan::<R>::new();
        for (i, &m) in masses.iter().enumerate() {
            if !(m >= R::zero()) {
                return Err(PmfError::NegativeMass {
                    z: support_offset + i as i64,
                    mass: m.as_f64(),
                });
            }
            sum.add(m);
        }
        let tol = if R::epsilon().as_f64() < 1e-12 { 1e-10 } else { 1e-4 };
        if (sum.value().as_f64() - 1.0).abs() > tol {
            return Err(PmfError::UnnormalizedMasses { sum: sum.value().as_f64() });
        }
        Ok(Self { support_offset, masses })
    }

    pub fn point_mass(at: i64) -> Self {
        Self { support_offset: at, masses: vec![R::one()] }
    }

    pub fn support_offset(&self) -> i64 {
        self.support_offset
    }

    pub fn support_max(&self) -> i64 {
        self.support_offset + self.masses.len() as i64 - 1
    }

    pub fn masses(&self) -> &[R] {
        &self.masses
    }

    /// Mass at `z`; zero outside the stored support.
    pub fn mass_at(&self, z: i64) -> R {
        let idx = z - self.support_offset;
        if idx < 0 || idx >= self.masses.len() as i64 {
            R::zero()
        } else {
            self.masses[idx as usize]
        }
    }

    pub fn mean(&self) -> R {
        let mut acc = Kahan::<R>::new();
        for (z, m) in self.iter() {
            acc.add(R::of(z as f64) * m);
        }
        acc.value()
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, R)> + '_ {
        self.masses
            .iter()
            .enumerate()
            .map(move |(i, &m)| (self.support_offset + i as i64, m))
    }

    /// Distribution of this variable plus the constant `s`.
    pub fn shifted(&self, s: i64) -> Self {
        Self { support_offset: self.support_offset + s, masses: self.masses.clone() }
    }

    /// Distribution of the sum of two independent variables.
    pub fn convolve(&self, other: &Self) -> Self {
        let mut out = vec![R::zero(); self.masses.len() + other.masses.len() - 1];
        for (i, &a) in self.masses.iter().enumerate() {
            if a == R::zero() {
                continue;
            }
            for (j, &b) in other.masses.iter().enumerate() {
                out[i + j] = out[i + j] + a * b;
            }
        }
        Self { support_offset: self.support_offset + other.support_offset, masses: out }
    }
}

fn check_prob<R: Real>(q: R) -> Result<(), PmfError> {
    if q >= R::zero() && q <= R::one() {
        Ok(())
    } else {
        Err(PmfError::InvalidProbability { value: q.as_f64() })
    }
}

/// Exact Binomial(t, q) pmf on `{0..t}`.
///
/// Computed by the multiplicative neighbor-ratio recurrence anchored at the
/// mode, then normalized; this stays accurate where a plain product of
/// factors would underflow (already at t in the thousands, `(1-q)^t` is
/// subnormal).
pub fn binomial_pmf<R: Real>(t: u64, q: R) -> Result<Pmf<R>, PmfError> {
    check_prob(q)?;
    if t == 0 || q == R::zero() {
        let mut masses = vec![R::zero(); t as usize + 1];
        masses[0] = R::one();
        return Ok(Pmf { support_offset: 0, masses });
    }
    if q == R::one() {
        let mut masses = vec![R::zero(); t as usize + 1];
        masses[t as usize] = R::one();
        return Ok(Pmf { support_offset: 0, masses });
    }

    let n = t as usize;
    let tf = R::of(t as f64);
    let mode = ((tf + R::one()) * q).floor().as_f64() as usize;
    let mode = mode.min(n);
    let odds = q / (R::one() - q);
    let mut masses = vec![R::zero(); n + 1];
    masses[mode] = R::one();
    // pmf(z) / pmf(z-1) = ((t - z + 1) / z) * odds
    for z in mode + 1..=n {
        let ratio = (tf - R::of(z as f64) + R::one()) / R::of(z as f64) * odds;
        masses[z] = masses[z - 1] * ratio;
        if masses[z] == R::zero() {
            break;
        }
    }
    for z in (0..mode).rev() {
        let ratio = R::of((z + 1) as f64) / (tf - R::of(z as f64)) / odds;
        masses[z] = masses[z + 1] * ratio;
        if masses[z] == R::zero() {
            break;
        }
    }
    let mut total = Kahan::<R>::new();
    for &m in &masses {
        total.add(m);
    }
    let norm = total.value();
    for m in &mut masses {
        *m = *m / norm;
    }
    Ok(Pmf { support_offset: 0, masses })
}

/// Exact pmf of a sum of independent Bernoulli draws with the given success
/// probabilities, by the O(t^2) sequential convolution.
pub fn poisson_binomial_pmf<R: Real>(qs: &[R]) -> Result<Pmf<R>, PmfError> {
    for &q in qs {
        check_prob(q)?;
    }
    let mut masses = Vec::with_capacity(qs.len() + 1);
    masses.push(R::one());
    for (step, &q) in qs.iter().enumerate() {
        let p0 = R::one() - q;
        masses.push(R::zero());
        for k in (1..=step + 1).rev() {
            masses[k] = masses[k] * p0 + masses[k - 1] * q;
        }
        masses[0] = masses[0] * p0;
    }
    Ok(Pmf { support_offset: 0, masses })
}

/// Reference implementation of [`poisson_binomial_pmf`] by exhaustive
/// enumeration of all 2^t outcomes. Exponential cost; used to certify the
/// convolution for small t.
pub fn enumerate_bernoulli_sum_pmf<R: Real>(qs: &[R]) -> Result<Pmf<R>, PmfError> {
    for &q in qs {
        check_prob(q)?;
    }
    assert!(qs.len() <= 24, "enumeration oracle is exponential in t");
    let t = qs.len();
    let mut masses = vec![Kahan::<R>::new(); t + 1];
    for bits in 0u64..(1u64 << t) {
        let mut prob = R::one();
        let mut count = 0usize;
        for (s, &q) in qs.iter().enumerate() {
            if bits >> s & 1 == 1 {
                prob = prob * q;
                count += 1;
            } else {
                prob = prob * (R::one() - q);
            }
        }
        masses[count].add(prob);
    }
    Ok(Pmf { support_offset: 0, masses: masses.into_iter().map(|k| k.value()).collect() })
}

/// Pmf of Binomial(t - s, q) shifted up by the constant `s` (support
/// `{s..t}`): the law of a count that starts with `s` forced successes.
pub fn shifted_binomial_pmf<R: Real>(t: u64, s: u64, q: R) -> Result<Pmf<R>, PmfError> {
    if s > t {
        return Err(PmfError::ShiftTooLarge { s, t });
    }
    Ok(binomial_pmf(t - s, q)?.shifted(s as i64))
}

/// Pmf of Bin(n/2, q_bar + delta) + Bin(n/2, q_bar - delta) + Bin(t - n,
/// q_bar): a balanced two-sided deviation on `n` of the `t` coins.
pub fn mixture_binomial_pmf<R: Real>(
    n: u64,
    t: u64,
    q_bar: R,
    delta: R,
) -> Result<Pmf<R>, PmfError> {
    if n % 2 != 0 || n > t {
        return Err(PmfError::BadMixtureSize { n, t });
    }
    let hi = q_bar + delta;
    let lo = q_bar - delta;
    if !(lo >= R::zero() && hi <= R::one() && lo <= hi) {
        return Err(PmfError::MixtureOutOfRange {
            q_bar: q_bar.as_f64(),
            delta: delta.as_f64(),
        });
    }
    let up = binomial_pmf(n / 2, hi)?;
    let down = binomial_pmf(n / 2, lo)?;
    let rest = binomial_pmf(t - n, q_bar)?;
    Ok(up.convolve(&down).convolve(&rest))
}

/// Worst relative deviation between the Binomial(t, q) pmf and the normal
/// density with matched mean and variance, over the integer window
/// `[tq - window_coeff*sqrt(t), tq + window_coeff*sqrt(t)]`.
pub fn demoivre_ratio_certificate<R: Real>(
    t: u64,
    q: R,
    window_coeff: R,
) -> Result<R, PmfError> {
    if !(q > R::zero() && q < R::one()) {
        return Err(PmfError::InvalidProbability { value: q.as_f64() });
    }
    let pmf = binomial_pmf(t, q)?;
    let tf = R::of(t as f64);
    let mean = tf * q;
    let var = mean * (R::one() - q);
    let half = window_coeff * tf.sqrt();
    let lo = (mean - half).ceil().as_f64().max(0.0) as i64;
    let hi = (mean + half).floor().as_f64().min(t as f64) as i64;
    if lo > hi {
        return Err(PmfError::EmptyWindow {
            lo: (mean - half).as_f64(),
            hi: (mean + half).as_f64(),
        });
    }
    let mut worst = R::zero();
    for z in lo..=hi {
        let approx = normal_pdf(R::of(z as f64), mean, var);
        let dev = (pmf.mass_at(z) / approx - R::one()).abs();
        worst = worst.max(dev);
    }
    Ok(worst)
}

/// Windowed minimum of `numerator(z) / denominator(z)` with the window
/// expressed as center and halfwidth in support units.
#[derive(Clone, Debug, Serialize)]
pub struct RatioWindowReport<R: Real = f64> {
    pub center: f64,
    pub halfwidth: f64,
    pub min_ratio: R,
    pub argmin_z: i64,
    /// Window halfwidth rescaled to units of sqrt(t), with t taken as the
    /// denominator's maximum support point.
    pub gamma: f64,
    /// True when a sub-1e-300 mass was treated as zero inside the window.
    pub underflow: bool,
}

/// Minimum pmf ratio over integer z in `[center - halfwidth, center +
/// halfwidth]`. Points where both masses vanish are skipped; a vanishing
/// denominator against positive numerator counts as +inf.
pub fn min_pmf_ratio<R: Real>(
    numerator: &Pmf<R>,
    denominator: &Pmf<R>,
    center: f64,
    halfwidth: f64,
) -> Result<RatioWindowReport<R>, PmfError> {
    let lo = (center - halfwidth).ceil() as i64;
    let hi = (center + halfwidth).floor() as i64;
    let tiny = R::of(RATIO_UNDERFLOW).max(R::min_positive_value());
    let mut best: Option<(R, i64)> = None;
    let mut underflow = false;
    for z in lo..=hi.max(lo - 1) {
        let mut n = numerator.mass_at(z);
        let mut d = denominator.mass_at(z);
        if (n > R::zero() && n < tiny) || (d > R::zero() && d < tiny) {
            underflow = true;
        }
        if n < tiny {
            n = R::zero();
        }
        if d < tiny {
            d = R::zero();
        }
        let ratio = match (n > R::zero(), d > R::zero()) {
            (false, false) => continue,
            (true, false) => R::infinity(),
            _ => n / d,
        };
        if best.map_or(true, |(m, _)| ratio < m) {
            best = Some((ratio, z));
        }
    }
    let (min_ratio, argmin_z) = best.ok_or(PmfError::EmptyWindow {
        lo: center - halfwidth,
        hi: center + halfwidth,
    })?;
    let t_den = denominator.support_max().max(0) as f64;
    let gamma = if t_den > 0.0 { halfwidth / t_den.sqrt() } else { 0.0 };
    Ok(RatioWindowReport { center, halfwidth, min_ratio, argmin_z, gamma, underflow })
}

/// Measured and analytic lower bounds for the change-of-measure ratio
/// between a plain Binomial(t, q) count and the same count with `s` forced
/// initial successes.
///
/// With `beta0 = window_coeff/q`, the ratio at any `z <= q(t +
/// beta0*sqrt(t))` obeys the term-by-term product bound
///
/// ```text
/// P(Bin(t,q) = z) / P(s + Bin(t-s,q) = z)
///     = q^s * prod_{l<s} (t-l)/(z-l)
///     >= (qt/z)^s >= (1 + beta0/sqrt(t))^(-s) >= exp(-s*beta0/sqrt(t)).
/// ```
///
/// Collapsing the middle expression to `(1 + beta0)^(-alpha)` with `alpha =
/// s/sqrt(t)` is tempting but wrong: `(1 + beta0/x)^(alpha*x)` increases in
/// `x >= 1` toward `exp(alpha*beta0)`, so that constant overstates the
/// floor, and exact pmf evaluation refutes it (already at t = 400, s = 20,
/// q = 1/2, window 1, where the true minimum is about 0.226 < 1/3).
#[derive(Clone, Debug, Serialize)]
pub struct ShiftRatioCheck<R: Real = f64> {
    /// min over z in `[s, qt + window_coeff*sqrt(t)]` of
    /// `P(Bin(t,q) = z) / P(s + Bin(t-s,q) = z)`.
    pub measured: R,
    /// `(1 + beta0/sqrt(t))^(-s)`: the valid windowed floor.
    pub bound: R,
    /// `exp(-alpha*beta0)` with `alpha = s/sqrt(t)`: the t-uniform floor
    /// the windowed one converges down to.
    pub uniform_floor: R,
    pub report: RatioWindowReport<R>,
}

/// Checks the analytic change-of-measure lower bound against exact pmfs.
/// `measured >= bound >= uniform_floor` is the certified relation.
pub fn shift_ratio_bound_check<R: Real>(
    t: u64,
    s: u64,
    q: R,
    window_coeff: R,
) -> Result<ShiftRatioCheck<R>, PmfError> {
    if !(q > R::zero() && q < R::one()) {
        return Err(PmfError::InvalidProbability { value: q.as_f64() });
    }
    let plain = binomial_pmf(t, q)?;
    let shifted = shifted_binomial_pmf(t, s, q)?;
    let tf = t as f64;
    let sqrt_t = tf.sqrt();
    let alpha = R::of(s as f64 / sqrt_t);
    let beta0 = window_coeff / q;
    let bound = (R::one() + beta0 / R::of(sqrt_t)).powi(-(s as i32));
    let uniform_floor = (-alpha * beta0).exp();
    // Window [s, qt + window_coeff*sqrt(t)], expressed as center/halfwidth.
    let upper = (q * R::of(tf) + window_coeff * R::of(sqrt_t)).as_f64();
    let lower = s as f64;
    if upper < lower {
        return Err(PmfError::EmptyWindow { lo: lower, hi: upper });
    }
    let center = 0.5 * (lower + upper);
    let halfwidth = 0.5 * (upper - lower);
    let report = min_pmf_ratio(&plain, &shifted, center, halfwidth)?;
    Ok(ShiftRatioCheck { measured: report.min_ratio, bound, uniform_floor, report })
}

/// Outcome of the exhaustive zero-sum-deviation search.
#[derive(Clone, Debug, Serialize)]
pub struct ExtremizerReport {
    pub t: u64,
    pub z: u64,
    pub q_bar: f64,
    pub delta: f64,
    pub grid_levels: u32,
    /// Minimal P(sum = z) over zero-sum deviation vectors on the grid.
    pub min_prob: f64,
    /// All grid minimizers (deviation vectors), up to floating-point ties.
    pub minimizers: Vec<Vec<f64>>,
    /// True when every minimizer coordinate sits at -delta, 0, or +delta.
    pub all_extreme: bool,
}

/// Brute-force minimizer of `P(sum of Ber(q_bar + eta_s) = z)` over
/// per-coordinate deviations `eta_s` on a symmetric grid in `[-delta,
/// delta]`, constrained to `sum eta_s = 0`. Exhaustive, so `t <= 8`.
pub fn extremizer_oracle(
    t: u64,
    q_bar: f64,
    delta: f64,
    z: u64,
    grid_levels: u32,
) -> Result<ExtremizerReport, PmfError> {
    if t == 0 || t > 8 {
        return Err(PmfError::ExtremizerUnsupported { t });
    }
    if z > t {
        return Err(PmfError::TargetOutsideSupport { z, t });
    }
    if grid_levels < 3 || grid_levels % 2 == 0 {
        return Err(PmfError::BadGrid { levels: grid_levels });
    }
    if !(0.0..=1.0).contains(&(q_bar - delta)) || !(0.0..=1.0).contains(&(q_bar + delta)) {
        return Err(PmfError::MixtureOutOfRange { q_bar, delta });
    }
    if !(delta >= 0.0) {
        return Err(PmfError::MixtureOutOfRange { q_bar, delta });
    }

    let t = t as usize;
    let levels = grid_levels as usize;
    let mid = (levels - 1) / 2;
    let step = if delta == 0.0 { 0.0 } else { 2.0 * delta / (levels - 1) as f64 };
    let value_of = |k: usize| -> f64 {
        if k == mid {
            0.0
        } else {
            -delta + k as f64 * step
        }
    };
    // Zero-sum in grid units: sum of level indices equals t * mid.
    let target: usize = t * mid;

    let mut best = f64::INFINITY;
    let mut minimizer_indices: Vec<Vec<usize>> = Vec::new();
    let mut indices = vec![0usize; t];
    let mut pos = 0usize;
    let mut sum = 0usize;
    // Depth-first walk over index vectors with partial-sum feasibility cuts.
    loop {
        if pos == t {
            if sum == target {
                let prob = success_count_prob(&indices, q_bar, value_of, z as usize);
                if prob < best * (1.0 - 1e-12) {
                    best = prob;
                    minimizer_indices.clear();
                    minimizer_indices.push(indices.clone());
                } else if prob <= best * (1.0 + 1e-12) {
                    best = best.min(prob);
                    minimizer_indices.push(indices.clone());
                }
            }
        } else {
            let remaining = t - pos;
            // Can the remaining coordinates still reach the target sum?
            if sum <= target && sum + remaining * (levels - 1) >= target {
                pos += 1;
                continue;
            }
        }
        // Backtrack to the deepest position that can still advance.
        loop {
            if pos == 0 {
                let zero = delta == 0.0;
                let all_extreme = minimizer_indices.iter().all(|ks| {
                    ks.iter().all(|&k| zero || k == 0 || k == mid || k == levels - 1)
                });
                let minimizers = minimizer_indices
                    .iter()
                    .map(|ks| ks.iter().map(|&k| value_of(k)).collect())
                    .collect();
                return Ok(ExtremizerReport {
                    t: t as u64,
                    z,
                    q_bar,
                    delta,
                    grid_levels,
                    min_prob: best,
                    minimizers,
                    all_extreme,
                });
            }
            let k = indices[pos - 1];
            if k + 1 < levels {
                indices[pos - 1] = k + 1;
                sum = sum + 1;
                break;
            }
            sum -= k;
            indices[pos - 1] = 0;
            pos -= 1;
        }
    }
}

// P(exactly `z` successes) for independent Bernoulli coordinates given by
// grid indices; small fixed-size DP.
fn success_count_prob(
    indices: &[usize],
    q_bar: f64,
    value_of: impl Fn(usize) -> f64,
    z: usize,
) -> f64 {
    let mut dp = [0.0f64; 9];
    dp[0] = 1.0;
    for (s, &k) in indices.iter().enumerate() {
        let q = q_bar + value_of(k);
        for j in (1..=s + 1).rev() {
            dp[j] = dp[j] * (1.0 - q) + dp[j - 1] * q;
        }
        dp[0] *= 1.0 - q;
    }
    dp[z]
}

/// Sampled realization-count law against its two independent-coin models.
#[derive(Clone, Debug, Serialize)]
pub struct ShakyHandsReport {
    pub t: u64,
    pub gamma: f64,
    pub n_runs: u64,
    pub q_star: f64,
    /// Histogram of the replicas' final counts `t * q_hat`, as a pmf.
    pub empirical: Pmf<f64>,
    /// Empirical over Poisson-binomial of the per-step ensemble-mean
    /// mixtures E[Q_s].
    pub vs_mixture_model: RatioWindowReport<f64>,
    /// Empirical over Binomial(t, q*).
    pub vs_iid_model: RatioWindowReport<f64>,
    /// 95% multinomial-sampling half-widths on the two min ratios, taken at
    /// their argmin bins.
    pub ci_vs_mixture: f64,
    pub ci_vs_iid: f64,
}

/// Runs `n_runs` replicas of `setup` truncated to `t` steps, histograms the
/// final player-2 counts, and reports the minimum empirical-to-model pmf
/// ratio on the window `t q* +- gamma sqrt(t)`.
///
/// The window must expect more than 20 hits per bin under both models;
/// undersampled calls are rejected with the run count that would suffice.
pub fn shaky_hands_estimate(
    setup: &crate::dynamics::RunSetup,
    t: u64,
    gamma: f64,
    n_runs: u64,
    master_seed: u64,
) -> Result<ShakyHandsReport, PmfError> {
    use rayon::prelude::*;

    if setup.kind.mode() != crate::dynamics::FeedbackMode::Realization {
        return Err(PmfError::NeedsRealizations);
    }
    let q_star = crate::games::nash_equilibrium(&setup.game)
        .map_err(|_| PmfError::NotCompetitive)?
        .q_star;
    let mut shaped = setup.clone();
    shaped.steps = t;
    // Full-resolution mixtures are needed for the per-step ensemble means.
    shaped.opts.tail_window = t as usize;

    // Fixed-size chunks with a sequential merge: the reduction order (and
    // so the result, bit for bit) is independent of the thread count.
    const CHUNK: u64 = 256;
    let mut hist = vec![0u64; t as usize + 1];
    let mut mix_sums = vec![Kahan::<f64>::new(); t as usize];
    let mut start = 0u64;
    while start < n_runs {
        let m = CHUNK.min(n_runs - start);
        let chunk: Vec<(usize, Vec<f64>)> = (start..start + m)
            .into_par_iter()
            .map(|g| {
                let traj = crate::dynamics::run(&shaped, crate::dynamics::mix_seed(master_seed, g));
                (traj.final_checkpoint().z_t as usize, traj.tail.q)
            })
            .collect();
        for (z, qs) in &chunk {
            hist[*z] += 1;
            for (s, q) in qs.iter().enumerate() {
                mix_sums[s].add(*q);
            }
        }
        start += m;
    }

    let n = n_runs as f64;
    let empirical = Pmf::new(0, hist.iter().map(|&c| c as f64 / n).collect())?;
    let mean_mix: Vec<f64> = mix_sums.iter().map(|k| k.value() / n).collect();
    let mixture_model = poisson_binomial_pmf(&mean_mix)?;
    let iid_model = binomial_pmf(t, q_star)?;

    let center = t as f64 * q_star;
    let halfwidth = gamma * (t as f64).sqrt();
    let lo = (center - halfwidth).ceil().max(0.0) as i64;
    let hi = (center + halfwidth).floor().min(t as f64) as i64;
    if lo > hi {
        return Err(PmfError::EmptyWindow { lo: center - halfwidth, hi: center + halfwidth });
    }
    let mut min_model_mass = f64::INFINITY;
    for z in lo..=hi {
        min_model_mass = min_model_mass
            .min(mixture_model.mass_at(z))
            .min(iid_model.mass_at(z));
    }
    if n * min_model_mass <= 20.0 {
        let required_runs = if min_model_mass > 0.0 {
            (20.0 / min_model_mass).floor() as u64 + 1
        } else {
            u64::MAX
        };
        return Err(PmfError::Undersampled { required_runs });
    }

    let vs_mixture_model = min_pmf_ratio(&empirical, &mixture_model, center, halfwidth)?;
    let vs_iid_model = min_pmf_ratio(&empirical, &iid_model, center, halfwidth)?;
    let ci = |rep: &RatioWindowReport<f64>, model: &Pmf<f64>| {
        let p = empirical.mass_at(rep.argmin_z);
        1.96 * (p * (1.0 - p) / n).sqrt() / model.mass_at(rep.argmin_z)
    };
    let ci_vs_mixture = ci(&vs_mixture_model, &mixture_model);
    let ci_vs_iid = ci(&vs_iid_model, &iid_model);
    Ok(ShakyHandsReport {
        t,
        gamma,
        n_runs,
        q_star,
        empirical,
        vs_mixture_model,
        vs_iid_model,
        ci_vs_mixture,
        ci_vs_iid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_edge_cases() {
        let p0 = binomial_pmf::<f64>(5, 0.0).unwrap();
        assert_eq!(p0.mass_at(0), 1.0);
        assert_eq!(p0.support_max(), 5);
        let p1 = binomial_pmf::<f64>(5, 1.0).unwrap();
        assert_eq!(p1.mass_at(5), 1.0);
        let single = binomial_pmf::<f64>(0, 0.4).unwrap();
        assert_eq!(single.mass_at(0), 1.0);
    }

    #[test]
    fn binomial_matches_log_space_evaluation() {
        // Independent check against lgamma-based point evaluation.
        let t = 1000u64;
        let q: f64 = 0.37;
        let pmf = binomial_pmf(t, q).unwrap();
        for z in [0u64, 100, 370, 500, 900, 1000] {
            let tf = t as f64;
            let zf = z as f64;
            let ln = (tf + 1.0).log_gamma() - (zf + 1.0).log_gamma() - (tf - zf + 1.0).log_gamma()
                + zf * q.ln()
                + (tf - zf) * (1.0 - q).ln();
            let reference = ln.exp();
            let got = pmf.mass_at(z as i64);
            if reference > 1e-280 {
                assert!(
                    (got / reference - 1.0).abs() < 1e-9,
                    "z = {z}: {got} vs {reference}"
                );
            }
        }
    }

    #[test]
    fn convolution_against_direct_sum() {
        let a = binomial_pmf::<f64>(3, 0.25).unwrap();
        let b = binomial_pmf::<f64>(2, 0.7).unwrap();
        let c = a.convolve(&b);
        let qs = [0.25, 0.25, 0.25, 0.7, 0.7];
        let direct = poisson_binomial_pmf(&qs).unwrap();
        for z in 0..=5 {
            assert!((c.mass_at(z) - direct.mass_at(z)).abs() < 1e-14);
        }
    }

    #[test]
    fn underflow_flag_set_on_far_tails() {
        // Bin(1000, 0.5) at z = 0 is 2^-1000, about 9.3e-302: representable
        // but below the cutoff, so it's zeroed and flagged. The bulk of the
        // window still yields the exact ratio 1.
        let num = binomial_pmf::<f64>(1000, 0.5).unwrap();
        let den = binomial_pmf::<f64>(1000, 0.5).unwrap();
        let report = min_pmf_ratio(&num, &den, 250.0, 250.0).unwrap();
        assert!(report.underflow);
        assert_eq!(report.min_ratio, 1.0);
    }

    #[test]
    fn shift_ratio_floor_holds_where_the_collapsed_constant_fails() {
        let chk = shift_ratio_bound_check::<f64>(400, 20, 0.5, 1.0).unwrap();
        assert!((chk.bound - 1.1f64.powi(-20)).abs() < 1e-12);
        assert!(chk.measured >= chk.bound);
        assert!(chk.bound >= chk.uniform_floor);
        // The minimum sits at the window's upper edge, strictly below the
        // collapsed constant (1 + beta0)^(-alpha) = 1/3.
        assert_eq!(chk.report.argmin_z, 220);
        assert!(chk.measured > 0.20 && chk.measured < 0.25);
        assert!(chk.measured < 1.0 / 3.0);
    }

    #[test]
    fn shift_ratio_without_shift_is_exactly_one() {
        let chk = shift_ratio_bound_check::<f64>(100, 0, 0.3, 1.0).unwrap();
        assert_eq!(chk.measured, 1.0);
        assert_eq!(chk.bound, 1.0);
    }
}
