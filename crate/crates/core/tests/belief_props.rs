mod common;

use common::bayes;
use posgi_core::belief::{condition_on, update_belief, update_belief_indexed};
use posgi_core::posgi::{
    build_state_space, MarketObservationModel, TabularObservationModel, TransitionModel,
};
use posgi_core::{
    BeliefState, InfoSignal, LiquidityParam, Observation, QuantityVector, TradeAction,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn run_case(seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_states = rng.random_range(1..=6);
    let n_obs = rng.random_range(1..=4);
    let m = bayes::random_model(&mut rng, n_states, n_obs);
    let t = TransitionModel::from_dense(&m.t).unwrap();
    let omega = TabularObservationModel::new(m.omega.clone()).unwrap();
    let prior = BeliefState::new(m.prior.clone()).unwrap();
    for action in 0..3 {
        for obs in 0..n_obs {
            let got =
                update_belief_indexed(&prior, action, &obs, &t, &omega, &m.signal_prior).unwrap();
            match bayes::posterior(&m, action, obs) {
                Some(expected) => {
                    assert!(!got.inconsistent, "seed {seed}");
                    for (a, e) in got.belief.probs().iter().zip(&expected) {
                        assert!((a - e).abs() <= 1e-12, "seed {seed}: {a} vs {e}");
                    }
                }
                None => assert!(
                    got.inconsistent,
                    "seed {seed}: impossible observation not flagged"
                ),
            }
            let total: f64 = got.belief.probs().iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn matches_brute_force_on_random_models() {
    for seed in 0..1000 {
        run_case(seed);
    }
}

proptest! {
    #[test]
    fn posterior_is_a_distribution(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = bayes::random_model(&mut rng, 5, 3);
        let t = TransitionModel::from_dense(&m.t).unwrap();
        let omega = TabularObservationModel::new(m.omega.clone()).unwrap();
        let prior = BeliefState::new(m.prior.clone()).unwrap();
        let got = update_belief_indexed(&prior, 1, &2usize, &t, &omega, &m.signal_prior).unwrap();
        prop_assert!(got.belief.probs().iter().all(|p| *p >= 0.0 && *p <= 1.0));
        prop_assert!((got.belief.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn likelihood_ratio_orders_the_posterior(l0 in 0.01f64..1.0, l1 in 0.01f64..1.0) {
        // Two states, flat prior and identity transition: the posterior odds
        // equal the likelihood ratio.
        let t = TransitionModel::from_dense(&vec![vec![vec![1.0, 0.0], vec![0.0, 1.0]]; 3]).unwrap();
        let omega = TabularObservationModel::new(vec![
            vec![vec![l0, 1.0 - l0]],
            vec![vec![l1, 1.0 - l1]],
        ])
        .unwrap();
        let prior = BeliefState::new(vec![0.5, 0.5]).unwrap();
        let got = update_belief_indexed(&prior, 0, &0usize, &t, &omega, &[1.0]).unwrap();
        let p = got.belief.probs();
        prop_assert_eq!(l0 > l1, p[0] > p[1]);
        prop_assert!((p[0] / p[1] - l0 / l1).abs() < 1e-9 * (l0 / l1));
    }
}

#[test]
fn exact_price_observation_pins_the_state() {
    let b = LiquidityParam::new(100.0).unwrap();
    let space = build_state_space(&QuantityVector::zeros(2).unwrap(), 10, 5).unwrap();
    let t = TransitionModel::market(&space, 2).unwrap();
    let omega = MarketObservationModel::new(&space, b, 0.9).unwrap();
    let prior = posgi_core::belief::uniform_prior(space.len()).unwrap();
    let idx = space.index_of_offset(3).unwrap();
    let obs = Observation {
        posted_price: omega.prices()[idx],
        signal: InfoSignal::Positive,
    };
    let prior_entropy = prior.entropy();
    let first = condition_on(&prior, &obs, &omega, &[0.25, 0.5, 0.25]).unwrap();
    assert!(!first.inconsistent);
    assert_eq!(first.belief.probs()[idx], 1.0);
    assert!(first.belief.entropy() < prior_entropy);
    assert!(first.belief.entropy().abs() < 1e-12);

    let next_idx = space.index_of_offset(4).unwrap();
    let obs = Observation {
        posted_price: omega.prices()[next_idx],
        signal: InfoSignal::Neutral,
    };
    let second = update_belief(
        &first.belief,
        TradeAction::Buy,
        &obs,
        &t,
        &omega,
        &[0.25, 0.5, 0.25],
    )
    .unwrap();
    assert!(!second.inconsistent);
    assert_eq!(second.belief.probs()[next_idx], 1.0);
}

#[test]
fn unreachable_price_is_flagged() {
    let b = LiquidityParam::new(100.0).unwrap();
    let space = build_state_space(&QuantityVector::zeros(2).unwrap(), 10, 5).unwrap();
    let t = TransitionModel::market(&space, 2).unwrap();
    let omega = MarketObservationModel::new(&space, b, 0.9).unwrap();
    let start = BeliefState::point(space.len(), space.index_of_offset(0).unwrap()).unwrap();
    // Two agents move the quantity by at most two units in a period.
    let far = space.index_of_offset(5).unwrap();
    let obs = Observation {
        posted_price: omega.prices()[far],
        signal: InfoSignal::Neutral,
    };
    let got = update_belief(
        &start,
        TradeAction::Hold,
        &obs,
        &t,
        &omega,
        &[0.25, 0.5, 0.25],
    )
    .unwrap();
    assert!(got.inconsistent);
    assert!((got.belief.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
}

#[test]
fn dimension_mismatch_is_an_error() {
    let t = TransitionModel::from_dense(&vec![vec![vec![1.0, 0.0], vec![0.0, 1.0]]; 3]).unwrap();
    let omega = TabularObservationModel::new(vec![vec![vec![1.0]]; 2]).unwrap();
    let prior = BeliefState::new(vec![0.2, 0.3, 0.5]).unwrap();
    assert!(update_belief_indexed(&prior, 0, &0usize, &t, &omega, &[1.0]).is_err());
}
