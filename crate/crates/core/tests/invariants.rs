//! Property tests for the library-wide invariants: normalization of the
//! canonical measure, divergence inequalities, mechanism round trips, and
//! audit witness reproducibility.

use proptest::prelude::*;

use privbandit::audit::{audit_pan_dp, reevaluate_pan_witness};
use privbandit::decomposition::{verify_kl_decomposition, verify_local_private_decomposition};
use privbandit::divergence::{kl, tv_l1, FiniteDistribution};
use privbandit::env::{
    enumerate_histories, expected_regret, history_probability, Environment, DEFAULT_ENUMERATION_CAP,
};
use privbandit::mechanism::{corrupt_distribution, rr_debias, Mechanism};
use privbandit::policy::{ldp_pipeline, Policy};
use privbandit::RewardDistribution;

const CAP: u128 = DEFAULT_ENUMERATION_CAP;

fn simplex(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(1e-3..1.0f64, n).prop_map(|raw| {
        let sum: f64 = raw.iter().sum();
        raw.into_iter().map(|x| x / sum).collect()
    })
}

proptest! {
    #[test]
    fn history_probabilities_normalize(
        beta in 0.0..6.0f64,
        p0 in 0.0..=1.0f64,
        p1 in 0.0..=1.0f64,
        horizon in 0usize..=3,
    ) {
        let env = Environment::bernoulli(&[p0, p1]).unwrap();
        let policy = Policy::softmax(beta).unwrap();
        let sum: f64 = enumerate_histories(2, &[0.0, 1.0], horizon, CAP)
            .unwrap()
            .map(|h| history_probability(&policy, &env, &h).unwrap().value())
            .sum();
        prop_assert!((sum - 1.0).abs() < 1e-9, "sum {sum}");
    }

    #[test]
    fn composed_ldp_probabilities_normalize(
        beta in 0.0..6.0f64,
        eps in 0.05..3.0f64,
        p0 in 0.0..=1.0f64,
        p1 in 0.0..=1.0f64,
    ) {
        let env = Environment::bernoulli(&[p0, p1]).unwrap();
        let rr = Mechanism::randomized_response(eps).unwrap();
        let policy = ldp_pipeline(&Policy::softmax(beta).unwrap(), &rr).unwrap();
        let sum: f64 = enumerate_histories(2, &[0.0, 1.0], 3, CAP)
            .unwrap()
            .map(|h| history_probability(&policy, &env, &h).unwrap().value())
            .sum();
        prop_assert!((sum - 1.0).abs() < 1e-9, "sum {sum}");
    }

    #[test]
    fn kl_nonnegative_and_pinsker_holds(
        p in simplex(5),
        q in simplex(5),
    ) {
        let p = FiniteDistribution::from_probs(p).unwrap();
        let q = FiniteDistribution::from_probs(q).unwrap();
        let divergence = kl(&p, &q);
        prop_assert!(divergence >= 0.0);
        let l1 = tv_l1(&p, &q).unwrap();
        prop_assert!(l1 * l1 <= 2.0 * divergence + 1e-12);
    }

    #[test]
    fn debias_inverts_corrupted_mean(
        p in 0.0..=1.0f64,
        eps in 0.05..4.0f64,
    ) {
        let f = RewardDistribution::bernoulli(p).unwrap();
        let corrupted = corrupt_distribution(&f, eps).unwrap();
        let recovered = rr_debias(corrupted.mean(), eps);
        prop_assert!((recovered - p).abs() < 1e-9, "p={p} recovered={recovered}");
    }

    #[test]
    fn expected_regret_nonnegative(
        means in prop::collection::vec(0.0..=1.0f64, 2..=5),
        counts in prop::collection::vec(0.0..100.0f64, 2..=5),
    ) {
        prop_assume!(means.len() == counts.len());
        let env = Environment::bernoulli(&means).unwrap();
        let regret = expected_regret(&env, &counts).unwrap();
        prop_assert!(regret >= 0.0);
        let all_gaps_zero = env.gaps().iter().zip(&counts).all(|(g, c)| *g == 0.0 || *c == 0.0);
        prop_assert_eq!(regret == 0.0, all_gaps_zero);
    }

    #[test]
    fn decomposition_equality_on_random_instances(
        beta in 0.0..5.0f64,
        means in prop::collection::vec(0.01..0.99f64, 4),
    ) {
        let env1 = Environment::bernoulli(&means[..2]).unwrap();
        let env2 = Environment::bernoulli(&means[2..]).unwrap();
        let policy = Policy::softmax(beta).unwrap();
        let report = verify_kl_decomposition(&policy, &env1, &env2, 2, CAP, 1e-9).unwrap();
        prop_assert!(report.passed(), "slack {}", report.slack);
    }

    #[test]
    fn local_private_bound_on_random_instances(
        beta in 0.0..5.0f64,
        eps in 0.05..2.5f64,
        means in prop::collection::vec(0.0..=1.0f64, 4),
    ) {
        let env1 = Environment::bernoulli(&means[..2]).unwrap();
        let env2 = Environment::bernoulli(&means[2..]).unwrap();
        let mech = Mechanism::randomized_response(eps).unwrap();
        let policy = Policy::softmax(beta).unwrap();
        let report =
            verify_local_private_decomposition(&mech, &policy, &env1, &env2, 2, CAP, 1e-9)
                .unwrap();
        prop_assert!(report.passed(), "slack {}", report.slack);
    }

    #[test]
    fn pan_audit_witness_reproduces(
        beta in 0.1..6.0f64,
    ) {
        let policy = Policy::softmax(beta).unwrap();
        let report = audit_pan_dp(&policy, 2, &[0.0, 1.0], 2, CAP).unwrap();
        if let Some(witness) = &report.witness {
            let again = reevaluate_pan_witness(&policy, 2, witness).unwrap();
            prop_assert!((again - report.epsilon_measured).abs() < 1e-12);
        }
    }
}
