//! KL-divergence decomposition over history distributions.
//!
//! The history-space KL between two environments under a fixed auditable
//! policy splits into a policy term (zero when the same policy function runs
//! in both environments) plus per-arm terms `E[N_a(T)] · KL(f_a¹ ‖ f_a²)`.
//! This module computes both sides by independent code paths — the left side
//! by flat enumeration of the history space, the right side by a prefix-tree
//! recursion for expected pull counts — and verifies the exact equality, its
//! locally private upper-bound variant, and the neighbouring-history variant.

use serde::{Deserialize, Serialize};

use crate::divergence::{kl, kl_raw, FiniteDistribution};
use crate::env::{
    enumerate_histories, history_probability, Environment, History, RewardDistribution,
};
use crate::error::{Error, Result};
use crate::mechanism::Mechanism;
use crate::policy::Policy;

/// Default tolerance for decomposition verdicts.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    PreconditionFail,
}

/// Both sides of a decomposition relation, with the slack `rhs − lhs` and a
/// pass/fail verdict. Equality relations pass when `|slack| ≤ tolerance`,
/// inequalities when `slack ≥ −tolerance`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub relation: String,
    pub lhs: f64,
    pub rhs: f64,
    /// Alternate right-hand side where two published forms exist.
    pub rhs_alternate: Option<f64>,
    pub per_arm_terms: Vec<f64>,
    pub policy_term: f64,
    pub slack: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
    pub witness: Option<String>,
}

impl DecompositionReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    fn equality(relation: &str, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let (slack, verdict) = if lhs.is_infinite() && rhs.is_infinite() && lhs == rhs {
            (0.0, Verdict::Pass)
        } else {
            let slack = rhs - lhs;
            let verdict = if slack.abs() <= tolerance {
                Verdict::Pass
            } else {
                Verdict::Fail
            };
            (slack, verdict)
        };
        Self {
            relation: relation.into(),
            lhs,
            rhs,
            rhs_alternate: None,
            per_arm_terms: Vec::new(),
            policy_term: 0.0,
            slack,
            tolerance,
            verdict,
            witness: None,
        }
    }

    fn inequality(relation: &str, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let (slack, verdict) = if rhs.is_infinite() {
            (f64::INFINITY, Verdict::Pass)
        } else if lhs.is_infinite() {
            (f64::NEG_INFINITY, Verdict::Fail)
        } else {
            let slack = rhs - lhs;
            let verdict = if slack >= -tolerance {
                Verdict::Pass
            } else {
                Verdict::Fail
            };
            (slack, verdict)
        };
        Self {
            relation: relation.into(),
            lhs,
            rhs,
            rhs_alternate: None,
            per_arm_terms: Vec::new(),
            policy_term: 0.0,
            slack,
            tolerance,
            verdict,
            witness: None,
        }
    }
}

fn check_compatible(env1: &Environment, env2: &Environment) -> Result<()> {
    if env1.num_arms() != env2.num_arms() {
        return Err(Error::DimensionMismatch {
            expected: env1.num_arms(),
            got: env2.num_arms(),
        });
    }
    Ok(())
}

fn union_alphabet(env1: &Environment, env2: &Environment) -> Vec<f64> {
    let mut alphabet = env1.joint_alphabet();
    for x in env2.joint_alphabet() {
        if !alphabet.contains(&x) {
            alphabet.push(x);
        }
    }
    alphabet.sort_by(|a, b| a.partial_cmp(b).expect("finite supports"));
    alphabet
}

/// KL divergence between one arm's reward distributions, aligned on the
/// union of their supports.
pub fn arm_kl(f1: &RewardDistribution, f2: &RewardDistribution) -> f64 {
    let mut support: Vec<f64> = f1.support().to_vec();
    for &x in f2.support() {
        if !support.contains(&x) {
            support.push(x);
        }
    }
    let p: Vec<f64> = support.iter().map(|&x| f1.prob_of(x)).collect();
    let q: Vec<f64> = support.iter().map(|&x| f2.prob_of(x)).collect();
    kl_raw(&p, &q)
}

/// Exact KL divergence between the two full history distributions induced by
/// running `policy` in `env1` versus `env2` for `horizon` steps, computed by
/// exhaustive enumeration of the history space.
pub fn kl_history(
    policy: &Policy,
    env1: &Environment,
    env2: &Environment,
    horizon: usize,
    cap: u128,
) -> Result<f64> {
    if !policy.auditable() {
        return Err(Error::NotAuditable(policy.kind_name().into()));
    }
    check_compatible(env1, env2)?;
    let alphabet = union_alphabet(env1, env2);
    let mut total = 0.0;
    for h in enumerate_histories(env1.num_arms(), &alphabet, horizon, cap)? {
        let p1 = history_probability(policy, env1, &h)?.value();
        if p1 == 0.0 {
            continue;
        }
        let p2 = history_probability(policy, env2, &h)?.value();
        if p2 == 0.0 {
            return Ok(f64::INFINITY);
        }
        total += p1 * (p1 / p2).ln();
    }
    Ok(total.max(0.0))
}

/// Expected pull counts `E[N_a(horizon)]` under `policy` in `env`, by
/// recursion over the prefix tree of histories.
pub fn expected_pull_counts(
    policy: &Policy,
    env: &Environment,
    horizon: usize,
    cap: u128,
) -> Result<Vec<f64>> {
    if !policy.auditable() {
        return Err(Error::NotAuditable(policy.kind_name().into()));
    }
    let k = env.num_arms();
    let alphabet_size = env.joint_alphabet().len().max(1);
    let mut states: u128 = 1;
    for _ in 0..horizon {
        states =
            states
                .checked_mul((k * alphabet_size) as u128)
                .ok_or(Error::EnumerationBudget {
                    required: u128::MAX,
                    cap,
                })?;
    }
    if states > cap {
        return Err(Error::EnumerationBudget {
            required: states,
            cap,
        });
    }
    let mut counts = vec![0.0; k];
    let mut prefix = History::new();
    descend(policy, env, horizon, 1.0, &mut prefix, &mut counts)?;
    Ok(counts)
}

fn descend(
    policy: &Policy,
    env: &Environment,
    remaining: usize,
    weight: f64,
    prefix: &mut History,
    counts: &mut [f64],
) -> Result<()> {
    if remaining == 0 {
        return Ok(());
    }
    let dist = policy.action_distribution(env.num_arms(), prefix)?;
    for (a, &pa) in dist.iter().enumerate() {
        if pa == 0.0 {
            continue;
        }
        counts[a] += weight * pa;
        let arm = env.arm(a)?;
        for (&x, &px) in arm.support().iter().zip(arm.probs()) {
            if px == 0.0 {
                continue;
            }
            prefix.push(a, x);
            descend(policy, env, remaining - 1, weight * pa * px, prefix, counts)?;
            prefix.pop();
        }
    }
    Ok(())
}

fn weighted_term(count: f64, divergence: f64) -> f64 {
    if count == 0.0 {
        0.0
    } else {
        count * divergence
    }
}

/// Verifies the exact history-KL decomposition: enumeration of the left side
/// must equal the policy term (zero here, since the same policy function runs
/// in both environments) plus `Σ_a E₁[N_a] · KL(f_a¹ ‖ f_a²)`.
pub fn verify_kl_decomposition(
    policy: &Policy,
    env1: &Environment,
    env2: &Environment,
    horizon: usize,
    cap: u128,
    tolerance: f64,
) -> Result<DecompositionReport> {
    check_compatible(env1, env2)?;
    let lhs = kl_history(policy, env1, env2, horizon, cap)?;
    let counts = expected_pull_counts(policy, env1, horizon, cap)?;
    let per_arm: Vec<f64> = (0..env1.num_arms())
        .map(|a| {
            let d = arm_kl(env1.arm(a).expect("checked"), env2.arm(a).expect("checked"));
            weighted_term(counts[a], d)
        })
        .collect();
    let policy_term = 0.0;
    let rhs = policy_term + per_arm.iter().sum::<f64>();
    let mut report = DecompositionReport::equality("kl-decomposition", lhs, rhs, tolerance);
    report.per_arm_terms = per_arm;
    report.policy_term = policy_term;
    Ok(report)
}

/// Verifies the locally private decomposition bound: the history KL of the
/// privatized system is at most
/// `2·min{4, e^{2ε}}·(e^ε − 1)² · Σ_a E₁[N_a] · KL(f_a¹ ‖ f_a²)`,
/// with the per-arm KLs taken over the *original* reward distributions.
pub fn verify_local_private_decomposition(
    mechanism: &Mechanism,
    base_policy: &Policy,
    env1: &Environment,
    env2: &Environment,
    horizon: usize,
    cap: u128,
    tolerance: f64,
) -> Result<DecompositionReport> {
    check_compatible(env1, env2)?;
    if !mechanism.is_finite_channel() {
        return Err(Error::InvalidParameter(
            "the privatized history space of a sampled-only mechanism cannot be enumerated".into(),
        ));
    }
    let corrupt_env = |env: &Environment| -> Result<Environment> {
        Environment::new(
            env.arms()
                .iter()
                .map(|arm| {
                    Ok(mechanism
                        .corrupt(arm)?
                        .exact()
                        .expect("finite channel")
                        .clone())
                })
                .collect::<Result<_>>()?,
        )
    };
    let private1 = corrupt_env(env1)?;
    let private2 = corrupt_env(env2)?;
    let lhs = kl_history(base_policy, &private1, &private2, horizon, cap)?;
    let counts = expected_pull_counts(base_policy, &private1, horizon, cap)?;
    let eps = mechanism.epsilon();
    let factor = 2.0 * 4.0f64.min((2.0 * eps).exp()) * (eps.exp() - 1.0).powi(2);
    let per_arm: Vec<f64> = (0..env1.num_arms())
        .map(|a| {
            let d = arm_kl(env1.arm(a).expect("checked"), env2.arm(a).expect("checked"));
            weighted_term(counts[a], d)
        })
        .collect();
    let sum: f64 = per_arm.iter().sum();
    let rhs = if sum == 0.0 { 0.0 } else { factor * sum };
    let mut report = DecompositionReport::inequality("local-private-kl-bound", lhs, rhs, tolerance);
    report.per_arm_terms = per_arm;
    Ok(report)
}

/// Verifies the neighbouring-history decomposition bound on a finite space
/// with an explicit neighbour bijection `σ`:
///
/// `KL(P₁ ‖ P₂) ≤ 2(ε+c) + e^{2(ε+c)} · KL(P₁∘σ ‖ P₂∘σ)`.
///
/// The precondition — every matched pair satisfies the two-sided ratio bound
/// `e^{−(ε+c)} ≤ P(H)/P(σ(H)) ≤ e^{ε+c}` for both distributions — is checked
/// first; a violation yields `PreconditionFail`, not a relation failure. The
/// alternate published form `e^{ε+c}·(2(ε+c) + KL(P₁∘σ ‖ P₂∘σ))` is computed
/// and reported alongside.
pub fn verify_neighbour_ratio_decomposition(
    p1: &FiniteDistribution,
    p2: &FiniteDistribution,
    neighbour_map: &[usize],
    ratio_bound: f64,
    tolerance: f64,
) -> Result<DecompositionReport> {
    let n = p1.len();
    if p2.len() != n || neighbour_map.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: p2.len().max(neighbour_map.len()),
        });
    }
    if !ratio_bound.is_finite() || ratio_bound <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "ratio bound must be positive and finite, got {ratio_bound}"
        )));
    }
    let mut seen = vec![false; n];
    for &j in neighbour_map {
        if j >= n || seen[j] {
            return Err(Error::InvalidParameter(
                "neighbour map must be a bijection of the space".into(),
            ));
        }
        seen[j] = true;
    }

    let bound = ratio_bound.exp() * (1.0 + 1e-12);
    for (name, dist) in [("P1", p1), ("P2", p2)] {
        for (i, &j) in neighbour_map.iter().enumerate() {
            let a = dist.probs()[i];
            let b = dist.probs()[j];
            if a > bound * b || b > bound * a {
                let mut report = DecompositionReport::inequality(
                    "neighbour-ratio-kl-bound",
                    f64::NAN,
                    f64::NAN,
                    tolerance,
                );
                report.verdict = Verdict::PreconditionFail;
                report.slack = f64::NAN;
                report.witness = Some(format!(
                    "{name} violates the ratio bound at pair ({i}, {j}): {a} vs {b}"
                ));
                return Ok(report);
            }
        }
    }

    let lhs = kl(p1, p2);
    let mapped_p1: Vec<f64> = neighbour_map.iter().map(|&j| p1.probs()[j]).collect();
    let mapped_p2: Vec<f64> = neighbour_map.iter().map(|&j| p2.probs()[j]).collect();
    let mapped_kl = kl_raw(&mapped_p1, &mapped_p2);
    let b = ratio_bound;
    let rhs = 2.0 * b + (2.0 * b).exp() * mapped_kl;
    let rhs_alternate = b.exp() * (2.0 * b + mapped_kl);
    let mut report =
        DecompositionReport::inequality("neighbour-ratio-kl-bound", lhs, rhs, tolerance);
    report.rhs_alternate = Some(rhs_alternate);
    Ok(report)
}

/// Upper-bound calculator for the instantaneous-DP decomposition:
/// `2ε(e^{2ε} − 1) · (1 − 2e^{−T/l}) / (1 − e^{−T/l}) + Σ_a E[N_a]·KL_a`.
///
/// This evaluates the published bound exactly as stated; it is not verified
/// against concrete instantaneous policies because the first term's
/// per-instance applicability is left open by its source.
pub fn instantaneous_decomposition_bound(
    epsilon: f64,
    horizon: f64,
    min_expected_pulls: f64,
    per_arm_sum: f64,
) -> Result<f64> {
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    if min_expected_pulls.is_nan()
        || min_expected_pulls <= 0.0
        || horizon.is_nan()
        || horizon <= 0.0
    {
        return Err(Error::InvalidParameter(
            "horizon and minimum expected pulls must be positive".into(),
        ));
    }
    let ratio = (-horizon / min_expected_pulls).exp();
    let policy_term =
        2.0 * epsilon * ((2.0 * epsilon).exp() - 1.0) * (1.0 - 2.0 * ratio) / (1.0 - ratio);
    Ok(policy_term + per_arm_sum)
}
