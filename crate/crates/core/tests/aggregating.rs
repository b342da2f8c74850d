use jeffreys_core::numeric::log_sum_exp;
use jeffreys_core::{
    aa_regret_slack, aa_step, run_expert_advice, ExpertPool, Game, GameKind, MixabilityParams,
    Nature, Prediction, Predictor, PredictorStrategy,
};
use proptest::prelude::*;

fn log2() -> Game {
    Game::new(GameKind::LogLoss { outcomes: 2 }).unwrap()
}

fn experts() -> Vec<Box<dyn PredictorStrategy>> {
    vec![
        Box::new(Predictor::running_mean(0.5)),
        Box::new(Predictor::Constant(Prediction::Distribution(vec![
            0.3, 0.7,
        ]))),
        Box::new(Predictor::noisy_target(0.4, 0.2, 0.0).unwrap()),
        Box::new(Predictor::Drift {
            start: 0.1,
            delta: 0.07,
        }),
    ]
}

#[test]
fn bayes_mixture_over_every_outcome_sequence() {
    let g = log2();
    let priors = vec![0.4, 0.3, 0.2, 0.1];
    let params = MixabilityParams::new(1.0, 1.0).unwrap();
    let mut worst: f64 = 0.0;
    for n in [1usize, 5, 12] {
        for bits in 0u32..(1 << n) {
            let outcomes: Vec<f64> = (0..n).map(|i| f64::from((bits >> i) & 1)).collect();
            let mut nature = Nature::replay(outcomes);
            let mut pool = experts();
            let run = run_expert_advice(&g, &mut pool, &mut nature, priors.clone(), params, n, 7)
                .unwrap();
            // -ln Σ_k p_k Π_n γ_k(ω_n)
            let oracle = -log_sum_exp(priors.iter().enumerate().map(|(k, p)| {
                p.ln() - run.log.expert_losses.iter().map(|row| row[k]).sum::<f64>()
            }));
            worst = worst.max((run.cumulative_loss() - oracle).abs());
        }
    }
    assert!(worst <= 1e-9, "{worst}");
}

#[test]
fn bounded_square_regret_bound_holds() {
    let g = Game::new(GameKind::BoundedSquareLoss).unwrap();
    let params = MixabilityParams::verified_for(&g).unwrap();
    let mut pool: Vec<Box<dyn PredictorStrategy>> = (0..6)
        .map(|k| {
            Box::new(Predictor::noisy_target(0.15 * k as f64, 0.1, 0.0).unwrap())
                as Box<dyn PredictorStrategy>
        })
        .collect();
    let mut nature = Nature::bernoulli(0.3).unwrap();
    let run = run_expert_advice(
        &g,
        &mut pool,
        &mut nature,
        vec![1.0 / 6.0; 6],
        params,
        2000,
        3,
    )
    .unwrap();
    assert!(run.log.worst_slack() >= -1e-9);
    let slack = aa_regret_slack(&run.log);
    assert_eq!(slack.len(), 6);
    assert!(slack.iter().all(|s| s.len() == 2000));
}

#[test]
fn adversarial_nature_cannot_break_the_regret_bound() {
    let g = log2();
    let mut pool = experts();
    let mut nature = Nature::adversarial_greedy(None).unwrap();
    let run = run_expert_advice(
        &g,
        &mut pool,
        &mut nature,
        vec![0.25; 4],
        MixabilityParams::new(1.0, 1.0).unwrap(),
        500,
        0,
    )
    .unwrap();
    assert!(run.log.worst_slack() >= -1e-9);
}

#[test]
fn pool_size_must_match_priors() {
    let g = log2();
    let mut pool = experts();
    let mut nature = Nature::bernoulli(0.5).unwrap();
    let err = run_expert_advice(
        &g,
        &mut pool,
        &mut nature,
        vec![0.5, 0.5],
        MixabilityParams::new(1.0, 1.0).unwrap(),
        5,
        0,
    );
    assert!(err.is_err());
}

proptest! {
    #[test]
    fn weights_stay_normalised(losses in prop::collection::vec(prop::collection::vec(0.0f64..5.0, 3), 0..40)) {
        let mut pool = ExpertPool::new(vec![0.5, 0.3, 0.2]).unwrap();
        for row in &losses {
            pool.observe(row, 1.0).unwrap();
        }
        let w = pool.normalized_weights().unwrap();
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(w.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn aa_step_on_identical_experts_returns_their_forecast(p in 0.01f64..0.99, k in 1usize..6) {
        let g = log2();
        let pool = ExpertPool::uniform(k).unwrap();
        let advice = vec![Prediction::Distribution(vec![1.0 - p, p]); k];
        let out = aa_step(&pool, &advice, &g, 1.0).unwrap();
        let d = out.as_distribution().unwrap();
        prop_assert!((d[1] - p).abs() < 1e-12);
    }

    #[test]
    fn log_loss_regret_slack_nonnegative(
        seed in any::<u64>(),
        targets in prop::collection::vec(0.05f64..0.95, 2..8),
        bias in 0.05f64..0.95,
    ) {
        let g = log2();
        let k = targets.len();
        let mut pool: Vec<Box<dyn PredictorStrategy>> = targets
            .iter()
            .map(|&t| Box::new(Predictor::noisy_target(t, 0.05, 0.0).unwrap()) as Box<dyn PredictorStrategy>)
            .collect();
        let mut nature = Nature::bernoulli(bias).unwrap();
        let run = run_expert_advice(
            &g, &mut pool, &mut nature, vec![1.0 / k as f64; k],
            MixabilityParams::new(1.0, 1.0).unwrap(), 200, seed,
        ).unwrap();
        prop_assert!(run.log.worst_slack() >= -1e-9);
    }
}
