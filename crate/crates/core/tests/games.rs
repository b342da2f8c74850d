use jeffreys_core::game::DEFAULT_TOL;
use jeffreys_core::{Game, GameKind, OutcomeGrid, Prediction};
use proptest::prelude::*;

fn scalar_games() -> Vec<Game> {
    vec![
        Game::new(GameKind::BoundedSquareLoss).unwrap(),
        Game::new(GameKind::BoundedAbsoluteLoss).unwrap(),
        Game::new(GameKind::SquareLoss).unwrap(),
        Game::builder(GameKind::AbsoluteLoss)
            .outcome_grid(OutcomeGrid::Uniform(9))
            .build()
            .unwrap(),
    ]
}

#[test]
fn bundled_games_are_non_redundant() {
    for g in scalar_games() {
        assert!(g.check_non_redundant(DEFAULT_TOL), "{}", g.kind());
    }
    assert!(Game::new(GameKind::LogLoss { outcomes: 2 })
        .unwrap()
        .check_non_redundant(DEFAULT_TOL));
}

#[test]
fn mixability_of_bundled_games() {
    let log3 = Game::new(GameKind::LogLoss { outcomes: 3 }).unwrap();
    assert!(log3.check_perfectly_mixable(1.0, DEFAULT_TOL).unwrap());
    let sq = Game::new(GameKind::BoundedSquareLoss).unwrap();
    assert!(sq.check_perfectly_mixable(2.0, DEFAULT_TOL).unwrap());
    assert!(!sq.check_perfectly_mixable(3.0, DEFAULT_TOL).unwrap());
}

proptest! {
    #[test]
    fn canonical_points_sit_on_the_boundary(x in 0.0f64..=1.0, lift in 1e-6f64..1.0) {
        for g in scalar_games().into_iter().take(2) {
            let p = g.canonical_point(&x.into()).unwrap();
            prop_assert!(g.is_superprediction(p.values(), DEFAULT_TOL).unwrap());
            prop_assert!(g.is_subprediction(p.values(), DEFAULT_TOL).unwrap());
            let up: Vec<f64> = p.values().iter().map(|v| v + lift).collect();
            prop_assert!(g.is_superprediction(&up, DEFAULT_TOL).unwrap());
            prop_assert!(!g.is_subprediction(&up, DEFAULT_TOL).unwrap());
            let down: Vec<f64> = p.values().iter().map(|v| v - lift).collect();
            prop_assert!(!g.is_superprediction(&down, DEFAULT_TOL).unwrap());
        }
    }

    #[test]
    fn log_loss_canonical_points_normalise(a in 0.01f64..1.0, b in 0.01f64..1.0, c in 0.01f64..1.0) {
        let g = Game::new(GameKind::LogLoss { outcomes: 3 }).unwrap();
        let s = a + b + c;
        let p = Prediction::Distribution(vec![a / s, b / s, c / s]);
        let lam = g.canonical_point(&p).unwrap();
        let total: f64 = lam.values().iter().map(|l| (-l).exp()).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        prop_assert!(g.is_superprediction(lam.values(), DEFAULT_TOL).unwrap());
    }

    #[test]
    fn clamped_predictions_are_valid(x in -10.0f64..10.0) {
        for g in scalar_games() {
            let p = g.clamp_prediction(Prediction::Scalar(x));
            prop_assert!(g.validate_prediction(&p).is_ok());
        }
    }
}
