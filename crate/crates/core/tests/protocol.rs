use std::cell::RefCell;
use std::rc::Rc;

use jeffreys_core::sceptic::{Level2Config, Level2Sceptic};
use jeffreys_core::{
    classify_disjuncts, run_protocol, verify_run, Check, Error, Game, GameKind, Nature,
    NatureStrategy, NatureView, Player, Prediction, Predictor, PredictorStrategy, PredictorView,
    ScepticStrategy, ScepticView, Thresholds, Verdict,
};
use rand::RngCore;

fn midpoint(g: &Game) -> Level2Sceptic {
    Level2Sceptic::new(g, Level2Config::new(0.0, 1e-3).unwrap())
}

#[test]
fn three_steps_of_constant_play() {
    let g = Game::new(GameKind::SquareLoss).unwrap();
    let mut p1 = Predictor::Constant(0.0.into());
    let mut p2 = Predictor::Constant(1.0.into());
    let mut s = midpoint(&g);
    let mut nature = Nature::constant(1.0);
    let trace = run_protocol(&g, &mut p1, &mut p2, &mut s, &mut nature, 3, 0).unwrap();
    assert_eq!(trace.steps.len(), 3);
    assert_eq!(trace.final_losses(), (3.0, 0.0, 0.75));
    let first = &trace.steps[0];
    assert_eq!(
        (first.loss1, first.loss2, first.loss_sceptic),
        (1.0, 0.0, 0.25)
    );
    assert_eq!(first.gap, 1.0);
    assert_eq!(first.divergence_term, Some(1.0));
    assert!(!trace.truncated);
}

type Sightings = Rc<RefCell<Vec<(usize, Vec<f64>)>>>;

/// Records what it was shown; the current outcome must never be among it.
struct Spy {
    seen: Sightings,
}

impl ScepticStrategy for Spy {
    fn name(&self) -> &'static str {
        "spy"
    }

    fn predict(&mut self, view: &ScepticView<'_>) -> jeffreys_core::Result<Prediction> {
        self.seen
            .borrow_mut()
            .push((view.step, view.outcomes.to_vec()));
        Ok(view.gamma1.mix(0.5, view.gamma2).unwrap())
    }

    fn observe(&mut self, _: f64, _: &Prediction, _: &Prediction) -> jeffreys_core::Result<()> {
        Ok(())
    }
}

/// Nature that checks it sees the Sceptic's current move.
struct Watcher {
    sceptic_moves: Vec<f64>,
}

impl NatureStrategy for Watcher {
    fn outcome(&mut self, view: &NatureView<'_>, rng: &mut dyn RngCore) -> Option<f64> {
        self.sceptic_moves
            .push(view.gamma_sceptic.as_scalar().unwrap());
        Some((rng.next_u32() % 2) as f64)
    }
}

#[test]
fn sceptic_never_sees_current_outcome() {
    let g = Game::new(GameKind::BoundedSquareLoss).unwrap();
    let seen = Rc::new(RefCell::new(Vec::new()));
    let mut spy = Spy { seen: seen.clone() };
    let mut p1 = Predictor::Constant(0.2.into());
    let mut p2 = Predictor::running_mean(0.5);
    let mut nature = Watcher {
        sceptic_moves: Vec::new(),
    };
    let trace = run_protocol(&g, &mut p1, &mut p2, &mut spy, &mut nature, 50, 3).unwrap();
    let outcomes: Vec<f64> = trace.outcomes().collect();
    for (step, history) in seen.borrow().iter() {
        assert_eq!(history.as_slice(), &outcomes[..step - 1]);
    }
    let recorded: Vec<f64> = trace
        .steps
        .iter()
        .map(|s| s.gamma_sceptic.as_scalar().unwrap())
        .collect();
    assert_eq!(nature.sceptic_moves, recorded);
}

#[test]
fn identical_seeds_give_identical_traces() {
    let g = Game::new(GameKind::LogLoss { outcomes: 2 }).unwrap();
    let run = |seed| {
        let mut p1 = Predictor::noisy_target(0.3, 0.2, 0.5).unwrap();
        let mut p2 = Predictor::noisy_target(0.6, 0.2, 0.5).unwrap();
        let mut s = midpoint(&g);
        let mut nature = Nature::bernoulli(0.4).unwrap();
        run_protocol(&g, &mut p1, &mut p2, &mut s, &mut nature, 500, seed).unwrap()
    };
    assert_eq!(run(17), run(17));
    assert_ne!(run(17).steps, run(18).steps);
}

#[test]
fn cumulative_losses_are_prefix_sums() {
    let g = Game::new(GameKind::AbsoluteLoss).unwrap();
    let mut p1 = Predictor::Drift {
        start: 0.0,
        delta: 0.01,
    };
    let mut p2 = Predictor::noisy_target(1.0, 1.0, 1.0).unwrap();
    let mut s = jeffreys_core::sceptic::Level1Sceptic::new(
        &g,
        jeffreys_core::sceptic::SaturatingShape::default(),
    );
    let mut nature = Nature::uniform(-1.0, 2.0).unwrap();
    let trace = run_protocol(&g, &mut p1, &mut p2, &mut s, &mut nature, 2000, 8).unwrap();
    let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
    for st in &trace.steps {
        a += st.loss1;
        b += st.loss2;
        c += st.loss_sceptic;
        for (x, y) in [(st.cum1, a), (st.cum2, b), (st.cum_sceptic, c)] {
            assert!((x - y).abs() <= 1e-12 * (1.0 + y.abs()));
        }
        assert!(st.gap >= 0.0);
    }
}

struct Broken;

impl PredictorStrategy for Broken {
    fn predict(&mut self, view: &PredictorView<'_>, _: &mut dyn RngCore) -> Prediction {
        if view.step == 4 {
            Prediction::Scalar(1.5)
        } else {
            Prediction::Scalar(0.5)
        }
    }
}

#[test]
fn invalid_move_aborts_with_step_index() {
    let g = Game::new(GameKind::BoundedSquareLoss).unwrap();
    let mut p1 = Predictor::Constant(0.5.into());
    let mut s = midpoint(&g);
    let mut nature = Nature::bernoulli(0.5).unwrap();
    let err = run_protocol(&g, &mut p1, &mut Broken, &mut s, &mut nature, 10, 0).unwrap_err();
    match err {
        Error::InvalidMove { step, player, .. } => {
            assert_eq!(step, 4);
            assert_eq!(player, Player::Predictor2);
        }
        other => panic!("unexpected {other:?}"),
    }
    let mut nature = Nature::constant(2.0);
    let mut p2 = p1.clone();
    let err = run_protocol(&g, &mut p1, &mut p2, &mut s, &mut nature, 10, 0).unwrap_err();
    assert!(matches!(
        err,
        Error::InvalidMove {
            step: 1,
            player: Player::Nature,
            ..
        }
    ));
}

#[test]
fn replay_exhaustion_truncates() {
    let g = Game::new(GameKind::BoundedSquareLoss).unwrap();
    let mut p1 = Predictor::Constant(0.1.into());
    let mut p2 = Predictor::Constant(0.9.into());
    let mut s = midpoint(&g);
    let mut nature = Nature::replay(vec![1.0, 0.0, 1.0]);
    let trace = run_protocol(&g, &mut p1, &mut p2, &mut s, &mut nature, 10, 0).unwrap();
    assert!(trace.truncated);
    assert_eq!(trace.outcomes().collect::<Vec<_>>(), vec![1.0, 0.0, 1.0]);
}

#[test]
fn greedy_nature_breaks_ties_downwards() {
    let g = Game::new(GameKind::BoundedSquareLoss).unwrap();
    let mut p1 = Predictor::Constant(0.0.into());
    let mut p2 = Predictor::Constant(1.0.into());
    let mut s = midpoint(&g);
    let mut nature = Nature::adversarial_greedy(Some(vec![1.0, 0.0])).unwrap();
    let trace = run_protocol(&g, &mut p1, &mut p2, &mut s, &mut nature, 5, 0).unwrap();
    assert!(trace.outcomes().all(|w| w == 0.0));

    let mut p2 = Predictor::Constant(0.8.into());
    let trace = run_protocol(&g, &mut p1, &mut p2, &mut s, &mut nature, 1, 0).unwrap();
    // γ̃ = 0.4: ω = 0 scores 0.16 - 0, ω = 1 scores 0.36 - 0.04.
    assert_eq!(trace.steps[0].omega, 1.0);
}

#[test]
fn predictor_examples() {
    let g = Game::new(GameKind::BoundedSquareLoss).unwrap();
    let mut rng = jeffreys_core::protocol::player_rng(0, Player::Predictor1);
    let mut mean = Predictor::running_mean(0.25);
    let view = |outcomes: &'static [f64]| PredictorView {
        step: outcomes.len() + 1,
        game: &g,
        outcomes,
    };
    assert_eq!(mean.predict(&view(&[]), &mut rng), Prediction::Scalar(0.25));
    assert_eq!(
        mean.predict(&view(&[0.0, 1.0]), &mut rng),
        Prediction::Scalar(0.5)
    );
    let mut c = Predictor::Constant(0.3.into());
    for n in 0..3 {
        assert_eq!(
            c.predict(&view(&[0.0, 0.0, 0.0][..n]), &mut rng),
            Prediction::Scalar(0.3)
        );
    }
    let mut drift = Predictor::Drift {
        start: 0.9,
        delta: 0.1,
    };
    assert_eq!(
        drift.predict(&view(&[0.0, 0.0]), &mut rng),
        Prediction::Scalar(1.0)
    );
    assert_eq!(
        drift.predict(&view(&[0.0, 0.0, 0.0]), &mut rng),
        Prediction::Scalar(1.0)
    );
}

#[test]
fn natures_are_reproducible() {
    let g = Game::new(GameKind::LogLoss { outcomes: 3 }).unwrap();
    let run = |nature: Nature| {
        let mut p = Predictor::Constant(Prediction::Distribution(vec![0.2, 0.3, 0.5]));
        let mut q = p.clone();
        let mut s = midpoint(&g);
        let mut n = nature;
        run_protocol(&g, &mut p, &mut q, &mut s, &mut n, 300, 42)
            .unwrap()
            .outcomes()
            .collect::<Vec<_>>()
    };
    let a = run(Nature::categorical(vec![0.2, 0.3, 0.5]).unwrap());
    assert_eq!(a, run(Nature::categorical(vec![0.2, 0.3, 0.5]).unwrap()));
    assert!(a.iter().all(|&w| w == 0.0 || w == 1.0 || w == 2.0));
    assert!([0.0, 1.0, 2.0].iter().all(|w| a.contains(w)));
}

#[test]
fn verdicts() {
    let g = Game::new(GameKind::BoundedSquareLoss).unwrap();
    let mut p1 = Predictor::Constant(0.4.into());
    let mut s = midpoint(&g);
    let mut nature = Nature::bernoulli(0.5).unwrap();
    let trace = run_protocol(&g, &mut p1.clone(), &mut p1, &mut s, &mut nature, 100, 1).unwrap();
    let r = classify_disjuncts(&trace, Thresholds::default());
    assert_eq!(r.verdicts.level3, vec![Verdict::GapVanishes]);
    assert_eq!(r.gap_sum_sq, 0.0);

    let mut p1 = Predictor::Constant(0.0.into());
    let mut p2 = Predictor::Constant(1.0.into());
    let mut nature = Nature::adversarial_greedy(None).unwrap();
    let trace = run_protocol(&g, &mut p1, &mut p2, &mut s, &mut nature, 3, 1).unwrap();
    let r = classify_disjuncts(&trace, Thresholds::default());
    assert_eq!(r.verdicts.level2, vec![Verdict::Inconclusive]);
    assert_eq!(r.verdicts.level3, vec![Verdict::Inconclusive]);
    assert_eq!(r.verdicts.strong, vec![Verdict::Inconclusive]);
}

#[test]
fn checks_need_their_metadata() {
    let g = Game::new(GameKind::BoundedSquareLoss).unwrap();
    let mut p1 = Predictor::Constant(0.4.into());
    let mut p2 = Predictor::Constant(0.6.into());
    let mut s = midpoint(&g);
    let mut nature = Nature::bernoulli(0.5).unwrap();
    let trace = run_protocol(&g, &mut p1, &mut p2, &mut s, &mut nature, 10, 1).unwrap();
    for check in [Check::Regret, Check::Ledger, Check::MartingaleNull] {
        let err = verify_run(&trace, &[check]).unwrap_err();
        assert!(
            matches!(err, Error::MissingMetadata { check: c, .. } if c == check.name()),
            "{err}"
        );
    }
    let ok = verify_run(&trace, &[Check::DivergenceBound]).unwrap();
    assert!(ok[0].pass);
}

#[test]
fn martingale_null_on_fair_coin() {
    let g = Game::new(GameKind::BoundedAbsoluteLoss).unwrap();
    let mut p1 = Predictor::Constant(0.0.into());
    let mut p2 = Predictor::Constant(1.0.into());
    let mut s = jeffreys_core::sceptic::Level1Sceptic::new(
        &g,
        jeffreys_core::sceptic::SaturatingShape::default(),
    );
    let mut nature = Nature::bernoulli(0.5).unwrap();
    let trace = run_protocol(&g, &mut p1, &mut p2, &mut s, &mut nature, 1000, 4).unwrap();
    let r = verify_run(&trace, &[Check::MartingaleNull, Check::Ledger]).unwrap();
    assert!(r.iter().all(|c| c.pass), "{r:?}");
    assert_eq!(r[0].min_slack, 0.0);
    assert_eq!(r[0].max_slack, 0.0);
}
