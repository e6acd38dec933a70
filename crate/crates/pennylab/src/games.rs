//! 2x2 games: payoff matrices, the competitive-game classification, named
//! game families, and the closed-form completely mixed Nash equilibrium.
//!
//! Conventions: player 1 picks a row `i`, player 2 a column `j`, both in
//! `{0, 1}`. `g[i][j]` is player 1's payoff, `h[i][j]` player 2's. Mixed
//! strategies are the probabilities `p`, `q` of playing action 1.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Real;

/// Which player's payoffs to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Player {
    One,
    Two,
}

/// Competitive classification: every strict-inequality pattern that forces a
/// unique, completely mixed equilibrium, or neither.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CompetitiveClass {
    /// g favors matching on the diagonal, h favors mismatching.
    ConditionA,
    /// The mirror pattern: every ConditionA inequality reversed.
    ConditionB,
    NotCompetitive,
}

#[derive(Debug, Error, PartialEq)]
pub enum GameError {
    #[error("payoff matrices must contain only finite values")]
    NonFinitePayoff,
    #[error("parameter {name} must be > 0 (got {value})")]
    NonPositiveParameter { name: &'static str, value: f64 },
    #[error("{name} must lie in [0, 1] (got {value})")]
    ProbabilityOutOfRange { name: &'static str, value: f64 },
    #[error("game is not competitive; equilibrium may be pure or non-unique")]
    NotCompetitive,
}

/// A two-player, two-action game in normal form.
///
/// Immutable after construction; serializes as `{"g": [[..],[..]], "h":
/// [[..],[..]]}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Game2x2<R: Real = f64> {
    pub g: [[R; 2]; 2],
    pub h: [[R; 2]; 2],
}

/// The unique completely mixed equilibrium of a competitive game.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium<R: Real = f64> {
    /// Probability that player 1 plays action 1.
    pub p_star: R,
    /// Probability that player 2 plays action 1.
    pub q_star: R,
    /// Player 1's payoff at the equilibrium.
    pub r_star: R,
}

// Negation that avoids minting -0.0, keeping serialized forms tidy.
fn neg<R: Real>(x: R) -> R {
    if x == R::zero() {
        R::zero()
    } else {
        -x
    }
}

impl<R: Real> Game2x2<R> {
    pub fn new(g: [[R; 2]; 2], h: [[R; 2]; 2]) -> Result<Self, GameError> {
        let finite = g.iter().chain(h.iter()).flatten().all(|x| x.is_finite());
        if !finite {
            return Err(GameError::NonFinitePayoff);
        }
        Ok(Self { g, h })
    }

    /// Builds the zero-sum game with `h = -g` entry for entry.
    pub fn zero_sum(g: [[R; 2]; 2]) -> Result<Self, GameError> {
        let h = [[neg(g[0][0]), neg(g[0][1])], [neg(g[1][0]), neg(g[1][1])]];
        Self::new(g, h)
    }

    pub fn is_zero_sum(&self) -> bool {
        (0..2).all(|i| (0..2).all(|j| self.h[i][j] == -self.g[i][j]))
    }

    pub fn matrix(&self, player: Player) -> &[[R; 2]; 2] {
        match player {
            Player::One => &self.g,
            Player::Two => &self.h,
        }
    }

    /// Payoff to `role` of playing `action` when the opponent plays action 1
    /// with probability `opp`. Callers clamp `opp`; no range check here.
    pub(crate) fn action_payoff(&self, role: Player, action: usize, opp: R) -> R {
        match role {
            Player::One => {
                (R::one() - opp) * self.g[action][0] + opp * self.g[action][1]
            }
            Player::Two => {
                (R::one() - opp) * self.h[0][action] + opp * self.h[1][action]
            }
        }
    }

    /// Swaps both players' action labels (reverses rows and columns of both
    /// matrices). Maps ConditionA games to ConditionB and vice versa.
    pub fn relabeled(&self) -> Self {
        let flip = |m: &[[R; 2]; 2]| [[m[1][1], m[1][0]], [m[0][1], m[0][0]]];
        Self { g: flip(&self.g), h: flip(&self.h) }
    }

    /// Applies the positive affine payoff transform `x -> a*x + b` with a
    /// per-player offset. Preserves the competitive class and the
    /// equilibrium mixtures.
    pub fn scale_shift(&self, a: R, b1: R, b2: R) -> Result<Self, GameError> {
        if !(a > R::zero()) {
            return Err(GameError::NonPositiveParameter { name: "a", value: a.as_f64() });
        }
        let map = |m: &[[R; 2]; 2], b: R| {
            [[a * m[0][0] + b, a * m[0][1] + b], [a * m[1][0] + b, a * m[1][1] + b]]
        };
        Self::new(map(&self.g, b1), map(&self.h, b2))
    }
}

/// The canonical matching pennies game: `g = [[1,0],[0,1]]`, `h = -g`.
/// Classified ConditionA with equilibrium (1/2, 1/2).
pub fn make_matching_pennies<R: Real>() -> Game2x2<R> {
    let o = R::one();
    let z = R::zero();
    Game2x2 { g: [[o, z], [z, o]], h: [[-o, z], [z, -o]] }
}

/// The (alpha, beta) competitive family: diagonal payoffs
/// `g = diag(-alpha, -1)`, `h = diag(beta, 1)`, zeros off the diagonal.
/// Classified ConditionB with equilibrium `(beta/(1+beta), alpha/(1+alpha))`.
pub fn make_competitive_family<R: Real>(alpha: R, beta: R) -> Result<Game2x2<R>, GameError> {
    check_positive("alpha", alpha)?;
    check_positive("beta", beta)?;
    let z = R::zero();
    let o = R::one();
    Game2x2::new([[-alpha, z], [z, -o]], [[beta, z], [z, o]])
}

/// The zero-sum game sharing the (alpha, beta) family's equilibrium:
/// `g = [[(1-alpha*beta)/(1+beta), 1], [(1+alpha)/(1+beta), 0]]`, `h = -g`.
pub fn make_zero_sum_equivalent<R: Real>(alpha: R, beta: R) -> Result<Game2x2<R>, GameError> {
    check_positive("alpha", alpha)?;
    check_positive("beta", beta)?;
    let o = R::one();
    let denom = o + beta;
    let g = [[(o - alpha * beta) / denom, o], [(o + alpha) / denom, R::zero()]];
    Game2x2::zero_sum(g)
}

fn check_positive<R: Real>(name: &'static str, value: R) -> Result<(), GameError> {
    if value > R::zero() && value.is_finite() {
        Ok(())
    } else {
        Err(GameError::NonPositiveParameter { name, value: value.as_f64() })
    }
}

/// Classifies a game by the strict payoff inequalities that force a unique
/// completely mixed equilibrium.
pub fn competitiveness<R: Real>(game: &Game2x2<R>) -> CompetitiveClass {
    let g = &game.g;
    let h = &game.h;
    let cond_a =
        g[0][0] > g[1][0] && g[0][1] < g[1][1] && h[0][0] < h[0][1] && h[1][0] > h[1][1];
    let cond_b =
        g[0][0] < g[1][0] && g[0][1] > g[1][1] && h[0][0] > h[0][1] && h[1][0] < h[1][1];
    match (cond_a, cond_b) {
        (true, _) => CompetitiveClass::ConditionA,
        (_, true) => CompetitiveClass::ConditionB,
        _ => CompetitiveClass::NotCompetitive,
    }
}

/// Computes the unique completely mixed equilibrium of a competitive game
/// from the two indifference conditions.
pub fn nash_equilibrium<R: Real>(game: &Game2x2<R>) -> Result<Equilibrium<R>, GameError> {
    if competitiveness(game) == CompetitiveClass::NotCompetitive {
        return Err(GameError::NotCompetitive);
    }
    // Player 2's mixture makes player 1 indifferent and vice versa. Both
    // denominators are sums of same-sign nonzero terms: the strict
    // inequalities of the classification guarantee it.
    let dq0 = game.g[0][0] - game.g[1][0];
    let dq1 = game.g[1][1] - game.g[0][1];
    let dp0 = game.h[0][0] - game.h[0][1];
    let dp1 = game.h[1][1] - game.h[1][0];
    assert!(
        dq0 * dq1 > R::zero() && dp0 * dp1 > R::zero(),
        "competitive classification must make indifference denominators same-signed"
    );
    let q_star = dq0 / (dq0 + dq1);
    let p_star = dp0 / (dp0 + dp1);
    assert!(
        p_star > R::zero() && p_star < R::one() && q_star > R::zero() && q_star < R::one(),
        "competitive equilibrium must be completely mixed"
    );
    let r_star = bilinear(&game.g, p_star, q_star);

    // Indifference residuals scale with the payoff magnitudes.
    let scale = game
        .g
        .iter()
        .chain(game.h.iter())
        .flatten()
        .fold(R::one(), |m, x| m.max(x.abs()));
    let tol = R::of(1e-12) * scale;
    let d1 = game.action_payoff(Player::One, 1, q_star)
        - game.action_payoff(Player::One, 0, q_star);
    let d2 = game.action_payoff(Player::Two, 1, p_star)
        - game.action_payoff(Player::Two, 0, p_star);
    assert!(
        d1.abs() <= tol && d2.abs() <= tol,
        "equilibrium must satisfy both indifference conditions"
    );
    Ok(Equilibrium { p_star, q_star, r_star })
}

fn bilinear<R: Real>(m: &[[R; 2]; 2], p: R, q: R) -> R {
    let o = R::one();
    (o - p) * ((o - q) * m[0][0] + q * m[0][1]) + p * ((o - q) * m[1][0] + q * m[1][1])
}

/// Expected payoff of the bilinear extension at mixtures `(p, q)`.
pub fn expected_payoff<R: Real>(
    game: &Game2x2<R>,
    p: R,
    q: R,
    player: Player,
) -> Result<R, GameError> {
    check_probability("p", p)?;
    check_probability("q", q)?;
    Ok(bilinear(game.matrix(player), p, q))
}

fn check_probability<R: Real>(name: &'static str, value: R) -> Result<(), GameError> {
    if value >= R::zero() && value <= R::one() {
        Ok(())
    } else {
        Err(GameError::ProbabilityOutOfRange { name, value: value.as_f64() })
    }
}
