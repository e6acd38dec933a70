use approx::assert_abs_diff_eq;
use pennylab::games::{
    competitiveness, expected_payoff, make_competitive_family, make_matching_pennies,
    make_zero_sum_equivalent, nash_equilibrium, CompetitiveClass, Game2x2, GameError, Player,
};
use proptest::prelude::*;

#[test]
fn matching_pennies_equilibrium_is_the_center() {
    let eq = nash_equilibrium(&make_matching_pennies::<f64>()).unwrap();
    assert_eq!(eq.p_star, 0.5);
    assert_eq!(eq.q_star, 0.5);
    assert_eq!(eq.r_star, 0.5);
}

#[test]
fn family_equilibria_match_their_closed_forms() {
    // (alpha, beta) puts the equilibrium at (beta/(1+beta), alpha/(1+alpha)).
    let cases = [(0.111, 4.0), (0.25, 0.429), (1.0, 1.0), (2.5, 0.2)];
    for (alpha, beta) in cases {
        let game = make_competitive_family::<f64>(alpha, beta).unwrap();
        let eq = nash_equilibrium(&game).unwrap();
        assert_abs_diff_eq!(eq.p_star, beta / (1.0 + beta), epsilon = 1e-12);
        assert_abs_diff_eq!(eq.q_star, alpha / (1.0 + alpha), epsilon = 1e-12);
    }
    // The second case is the one whose player-1 iterate sits near 0.3.
    let eq = nash_equilibrium(&make_competitive_family::<f64>(0.25, 0.429).unwrap()).unwrap();
    assert_abs_diff_eq!(eq.p_star, 0.3002099370188943, epsilon = 1e-12);
}

#[test]
fn zero_sum_twin_shares_the_equilibrium() {
    for (alpha, beta) in [(0.111, 4.0), (0.25, 0.429), (3.0, 0.5)] {
        let family = make_competitive_family::<f64>(alpha, beta).unwrap();
        let twin = make_zero_sum_equivalent::<f64>(alpha, beta).unwrap();
        let a = nash_equilibrium(&family).unwrap();
        let b = nash_equilibrium(&twin).unwrap();
        assert_abs_diff_eq!(a.p_star, b.p_star, epsilon = 1e-12);
        assert_abs_diff_eq!(a.q_star, b.q_star, epsilon = 1e-12);
        assert!(twin.is_zero_sum());
        assert!(!family.is_zero_sum());
    }
}

#[test]
fn orientation_classification_covers_both_signs() {
    let mp = make_matching_pennies::<f64>();
    assert_eq!(competitiveness(&mp), CompetitiveClass::ConditionA);

    // Relabeling both players' actions flips the inequality pattern but
    // keeps the centered equilibrium.
    let flipped = mp.relabeled();
    assert_eq!(competitiveness(&flipped), CompetitiveClass::ConditionB);
    let eq = nash_equilibrium(&flipped).unwrap();
    assert_eq!((eq.p_star, eq.q_star), (0.5, 0.5));

    // A common-interest game is not competitive and has no mixed NE here.
    let common = Game2x2::<f64>::new([[1.0, 0.0], [0.0, 1.0]], [[1.0, 0.0], [0.0, 1.0]]).unwrap();
    assert_eq!(competitiveness(&common), CompetitiveClass::NotCompetitive);
    assert!(matches!(nash_equilibrium(&common), Err(GameError::NotCompetitive)));
}

#[test]
fn expected_payoff_is_bilinear_in_the_mixtures() {
    let game = make_competitive_family::<f64>(0.7, 1.3).unwrap();
    let (p, q) = (0.35, 0.81);
    for player in [Player::One, Player::Two] {
        let m = match player {
            Player::One => game.g,
            Player::Two => game.h,
        };
        let direct = (1.0 - p) * (1.0 - q) * m[0][0]
            + (1.0 - p) * q * m[0][1]
            + p * (1.0 - q) * m[1][0]
            + p * q * m[1][1];
        assert_abs_diff_eq!(
            expected_payoff(&game, p, q, player).unwrap(),
            direct,
            epsilon = 1e-14
        );
    }
}

#[test]
fn mixture_arguments_are_validated() {
    let game = make_matching_pennies::<f64>();
    assert!(expected_payoff(&game, -0.1, 0.5, Player::One).is_err());
    assert!(expected_payoff(&game, 0.5, 1.5, Player::Two).is_err());
    assert!(make_competitive_family::<f64>(0.0, 1.0).is_err());
    assert!(make_competitive_family::<f64>(1.0, -2.0).is_err());
}

proptest! {
    // At the mixed equilibrium each player is indifferent: player 1's payoff
    // is flat in p at q = q*, player 2's is flat in q at p = p*.
    #[test]
    fn equilibrium_makes_the_opponent_indifferent(
        alpha in 0.05f64..5.0,
        beta in 0.05f64..5.0,
        p in 0.0f64..=1.0,
        q in 0.0f64..=1.0,
    ) {
        let game = make_competitive_family::<f64>(alpha, beta).unwrap();
        let eq = nash_equilibrium(&game).unwrap();
        prop_assert!(eq.p_star > 0.0 && eq.p_star < 1.0);
        prop_assert!(eq.q_star > 0.0 && eq.q_star < 1.0);

        let at_eq = expected_payoff(&game, eq.p_star, eq.q_star, Player::One).unwrap();
        let moved = expected_payoff(&game, p, eq.q_star, Player::One).unwrap();
        prop_assert!((moved - at_eq).abs() < 1e-9);

        let at_eq2 = expected_payoff(&game, eq.p_star, eq.q_star, Player::Two).unwrap();
        let moved2 = expected_payoff(&game, eq.p_star, q, Player::Two).unwrap();
        prop_assert!((moved2 - at_eq2).abs() < 1e-9);

        prop_assert!((eq.r_star - at_eq).abs() < 1e-12);
    }
}
