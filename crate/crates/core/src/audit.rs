//! Empirical privacy measurement by exhaustive enumeration.
//!
//! For auditable policies the measured privacy level is exact: the auditor
//! enumerates every neighbouring input pair and every action sequence, and
//! reports the extreme log-ratio together with a witness that reproduces it.
//! Sampling-based estimation is deliberately excluded; log-ratio extremes are
//! not reliably estimable from samples at this scale.

use serde::{Deserialize, Serialize};

use crate::env::{enumerate_histories, history_probability, Environment, History};
use crate::error::{Error, Result};
use crate::mechanism::Mechanism;
use crate::policy::Policy;

/// Which privacy definition an audit measured.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AuditDefinition {
    PanDp,
    InstantaneousDp,
    LocalMechanism,
    Environment,
}

/// The neighbouring pair attaining the measured privacy level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum AuditWitness {
    /// Two outcome matrices (rows: arms, columns: steps) at Hamming
    /// distance 1 and the action sequence separating them.
    OutcomeMatrices {
        matrix: Vec<Vec<f64>>,
        matrix_prime: Vec<Vec<f64>>,
        actions: Vec<usize>,
    },
    /// Two reward sequences differing in one position and the action
    /// sequence separating them.
    RewardSequences {
        actions: Vec<usize>,
        rewards: Vec<f64>,
        rewards_prime: Vec<f64>,
    },
    /// A single decision whose conditional probability shifts the most under
    /// one reward substitution in its prefix.
    InstantaneousStep {
        action_prefix: Vec<usize>,
        rewards: Vec<f64>,
        rewards_prime: Vec<f64>,
        final_action: usize,
    },
    /// An input pair and output of a finite channel.
    Channel {
        input: f64,
        input_prime: f64,
        output: f64,
    },
    /// The history whose probability shifts the most between environments.
    History { steps: Vec<(usize, f64)> },
}

mod maybe_infinite {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            v.serialize(s)
        } else {
            "infinity".serialize(s)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(#[allow(dead_code)] String),
        }
        Ok(match Raw::deserialize(d)? {
            Raw::Number(v) => v,
            Raw::Text(_) => f64::INFINITY,
        })
    }
}

/// Result of one audit: the definition checked, the declared privacy level
/// (when one exists), the measured level `ε̂ = max |log ratio|`, and the
/// witness attaining it.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AuditReport {
    pub definition: AuditDefinition,
    pub epsilon_claimed: Option<f64>,
    #[serde(with = "maybe_infinite")]
    pub epsilon_measured: f64,
    pub witness: Option<AuditWitness>,
    pub horizon: usize,
    pub alphabet: Vec<f64>,
    /// Set by the environment audit when the two environments coincide and
    /// the zero distance is benign.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub identical_environments: bool,
}

/// Running maximum with first-attained (lexicographically smallest) witness.
struct MaxTracker {
    epsilon: f64,
    witness: Option<AuditWitness>,
}

impl MaxTracker {
    fn new() -> Self {
        Self {
            epsilon: 0.0,
            witness: None,
        }
    }

    /// Observes one ratio pair. Returns true when the maximum is infinite and
    /// scanning can stop.
    fn observe(&mut self, p: f64, p_prime: f64, witness: impl FnOnce() -> AuditWitness) -> bool {
        if p == 0.0 && p_prime == 0.0 {
            return false;
        }
        if p == 0.0 || p_prime == 0.0 {
            self.epsilon = f64::INFINITY;
            self.witness = Some(witness());
            return true;
        }
        let ratio = (p / p_prime).ln().abs();
        if ratio > self.epsilon {
            self.epsilon = ratio;
            self.witness = Some(witness());
        }
        false
    }
}

fn check_auditable(policy: &Policy) -> Result<()> {
    if !policy.auditable() {
        return Err(Error::NotAuditable(policy.kind_name().into()));
    }
    Ok(())
}

fn checked_pow(base: u128, exponent: usize, cap: u128) -> Result<u128> {
    let mut total: u128 = 1;
    for _ in 0..exponent {
        total = total.checked_mul(base).ok_or(Error::EnumerationBudget {
            required: u128::MAX,
            cap,
        })?;
    }
    Ok(total)
}

/// Probability that `policy` plays exactly `actions` when the arms generate
/// the fixed outcome matrix `outcomes[arm][step]`.
fn action_sequence_prob_on_outcomes(
    policy: &Policy,
    num_arms: usize,
    outcomes: &[Vec<f64>],
    actions: &[usize],
) -> Result<f64> {
    let mut prefix = History::new();
    let mut prob = 1.0;
    for (t, &a) in actions.iter().enumerate() {
        let dist = policy.action_distribution(num_arms, &prefix)?;
        prob *= dist[a];
        prefix.push(a, outcomes[a][t]);
    }
    Ok(prob)
}

/// Probability that `policy` plays exactly `actions` when the realized reward
/// sequence is `rewards` (reward t is observed after action t).
fn action_sequence_prob_on_rewards(
    policy: &Policy,
    num_arms: usize,
    rewards: &[f64],
    actions: &[usize],
) -> Result<f64> {
    let mut prefix = History::new();
    let mut prob = 1.0;
    for (t, &a) in actions.iter().enumerate() {
        let dist = policy.action_distribution(num_arms, &prefix)?;
        prob *= dist[a];
        prefix.push(a, rewards[t]);
    }
    Ok(prob)
}

fn decode_digits(mut code: u128, base: usize, len: usize) -> Vec<usize> {
    let mut digits = vec![0usize; len];
    for slot in (0..len).rev() {
        digits[slot] = (code % base as u128) as usize;
        code /= base as u128;
    }
    digits
}

fn encode_matrix(
    digits: &[usize],
    alphabet: &[f64],
    num_arms: usize,
    horizon: usize,
) -> Vec<Vec<f64>> {
    (0..num_arms)
        .map(|a| {
            (0..horizon)
                .map(|t| alphabet[digits[a * horizon + t]])
                .collect()
        })
        .collect()
}

/// Audits the pan-DP definition: the measured level is the extreme
/// `|ln P(a^T | x^T) − ln P(a^T | x'^T)|` over all outcome-matrix pairs at
/// Hamming distance 1 (one cell differs) and all action sequences.
pub fn audit_pan_dp(
    policy: &Policy,
    num_arms: usize,
    alphabet: &[f64],
    horizon: usize,
    cap: u128,
) -> Result<AuditReport> {
    check_auditable(policy)?;
    let m = alphabet.len();
    if m < 2 {
        return Err(Error::InvalidParameter(
            "auditing needs at least two alphabet values".into(),
        ));
    }
    let cells = num_arms * horizon;
    let matrices = checked_pow(m as u128, cells, cap)?;
    let seqs = checked_pow(num_arms as u128, horizon, cap)?;
    let budget = matrices.checked_mul(seqs).ok_or(Error::EnumerationBudget {
        required: u128::MAX,
        cap,
    })?;
    if budget > cap {
        return Err(Error::EnumerationBudget {
            required: budget,
            cap,
        });
    }

    // Probability table indexed by (matrix code, action-sequence code).
    let mut table = vec![0.0f64; (matrices * seqs) as usize];
    let mut actions_buf = Vec::with_capacity(seqs as usize);
    for seq in 0..seqs {
        actions_buf.push(decode_digits(seq, num_arms, horizon));
    }
    for code in 0..matrices {
        let digits = decode_digits(code, m, cells);
        let outcomes = encode_matrix(&digits, alphabet, num_arms, horizon);
        for (seq, actions) in actions_buf.iter().enumerate() {
            table[code as usize * seqs as usize + seq] =
                action_sequence_prob_on_outcomes(policy, num_arms, &outcomes, actions)?;
        }
    }

    let mut tracker = MaxTracker::new();
    let mut place = vec![0u128; cells];
    for (c, slot) in place.iter_mut().enumerate() {
        *slot = checked_pow(m as u128, cells - 1 - c, cap)?;
    }
    'scan: for code in 0..matrices {
        let digits = decode_digits(code, m, cells);
        for cell in 0..cells {
            for alt in (digits[cell] + 1)..m {
                let code_prime = code + (alt as u128 - digits[cell] as u128) * place[cell];
                for (seq, actions) in actions_buf.iter().enumerate() {
                    let p = table[code as usize * seqs as usize + seq];
                    let p_prime = table[code_prime as usize * seqs as usize + seq];
                    let stop = tracker.observe(p, p_prime, || AuditWitness::OutcomeMatrices {
                        matrix: encode_matrix(&digits, alphabet, num_arms, horizon),
                        matrix_prime: encode_matrix(
                            &decode_digits(code_prime, m, cells),
                            alphabet,
                            num_arms,
                            horizon,
                        ),
                        actions: actions.clone(),
                    });
                    if stop {
                        break 'scan;
                    }
                }
            }
        }
    }

    Ok(AuditReport {
        definition: AuditDefinition::PanDp,
        epsilon_claimed: policy.mechanism().map(Mechanism::epsilon),
        epsilon_measured: tracker.epsilon,
        witness: tracker.witness,
        horizon,
        alphabet: alphabet.to_vec(),
        identical_environments: false,
    })
}

/// Audits the pan-DP definition with respect to realized reward sequences
/// instead of full outcome matrices.
pub fn audit_reward_dp(
    policy: &Policy,
    num_arms: usize,
    alphabet: &[f64],
    horizon: usize,
    cap: u128,
) -> Result<AuditReport> {
    check_auditable(policy)?;
    let m = alphabet.len();
    let reward_seqs = checked_pow(m as u128, horizon, cap)?;
    let seqs = checked_pow(num_arms as u128, horizon, cap)?;
    let budget = reward_seqs
        .checked_mul(seqs)
        .ok_or(Error::EnumerationBudget {
            required: u128::MAX,
            cap,
        })?;
    if budget > cap {
        return Err(Error::EnumerationBudget {
            required: budget,
            cap,
        });
    }

    let mut table = vec![0.0f64; (reward_seqs * seqs) as usize];
    let mut actions_buf = Vec::with_capacity(seqs as usize);
    for seq in 0..seqs {
        actions_buf.push(decode_digits(seq, num_arms, horizon));
    }
    let rewards_of = |code: u128| -> Vec<f64> {
        decode_digits(code, m, horizon)
            .into_iter()
            .map(|d| alphabet[d])
            .collect()
    };
    for code in 0..reward_seqs {
        let rewards = rewards_of(code);
        for (seq, actions) in actions_buf.iter().enumerate() {
            table[code as usize * seqs as usize + seq] =
                action_sequence_prob_on_rewards(policy, num_arms, &rewards, actions)?;
        }
    }

    let mut tracker = MaxTracker::new();
    let mut place = vec![0u128; horizon];
    for (c, slot) in place.iter_mut().enumerate() {
        *slot = checked_pow(m as u128, horizon - 1 - c, cap)?;
    }
    'scan: for code in 0..reward_seqs {
        let digits = decode_digits(code, m, horizon);
        for pos in 0..horizon {
            for alt in (digits[pos] + 1)..m {
                let code_prime = code + (alt as u128 - digits[pos] as u128) * place[pos];
                for (seq, actions) in actions_buf.iter().enumerate() {
                    let p = table[code as usize * seqs as usize + seq];
                    let p_prime = table[code_prime as usize * seqs as usize + seq];
                    let stop = tracker.observe(p, p_prime, || AuditWitness::RewardSequences {
                        actions: actions.clone(),
                        rewards: rewards_of(code),
                        rewards_prime: rewards_of(code_prime),
                    });
                    if stop {
                        break 'scan;
                    }
                }
            }
        }
    }

    Ok(AuditReport {
        definition: AuditDefinition::PanDp,
        epsilon_claimed: policy.mechanism().map(Mechanism::epsilon),
        epsilon_measured: tracker.epsilon,
        witness: tracker.witness,
        horizon,
        alphabet: alphabet.to_vec(),
        identical_environments: false,
    })
}

/// Audits the instantaneous-DP definition: for every decision time, action
/// prefix, reward prefix, single-reward substitution, and final action, the
/// extreme `|ln π(a_t | prefix) − ln π(a_t | prefix')|`.
pub fn audit_instantaneous_dp(
    policy: &Policy,
    num_arms: usize,
    alphabet: &[f64],
    horizon: usize,
    cap: u128,
) -> Result<AuditReport> {
    check_auditable(policy)?;
    let m = alphabet.len();
    let budget = checked_pow((num_arms * m) as u128, horizon, cap)?;
    if budget > cap {
        return Err(Error::EnumerationBudget {
            required: budget,
            cap,
        });
    }

    let mut tracker = MaxTracker::new();
    'scan: for t in 1..=horizon {
        let prefix_len = t - 1;
        if prefix_len == 0 {
            continue; // no rewards to substitute
        }
        let action_prefixes = checked_pow(num_arms as u128, prefix_len, cap)?;
        let reward_prefixes = checked_pow(m as u128, prefix_len, cap)?;
        for a_code in 0..action_prefixes {
            let actions = decode_digits(a_code, num_arms, prefix_len);
            for r_code in 0..reward_prefixes {
                let reward_digits = decode_digits(r_code, m, prefix_len);
                let rewards: Vec<f64> = reward_digits.iter().map(|&d| alphabet[d]).collect();
                let pairs: Vec<(usize, f64)> = actions
                    .iter()
                    .copied()
                    .zip(rewards.iter().copied())
                    .collect();
                let base = policy.action_distribution(num_arms, &History::from_pairs(&pairs))?;
                for pos in 0..prefix_len {
                    for (alt, &alt_value) in alphabet.iter().enumerate() {
                        if alt == reward_digits[pos] {
                            continue;
                        }
                        let mut pairs_prime = pairs.clone();
                        pairs_prime[pos].1 = alt_value;
                        let shifted = policy
                            .action_distribution(num_arms, &History::from_pairs(&pairs_prime))?;
                        for final_action in 0..num_arms {
                            let stop =
                                tracker.observe(base[final_action], shifted[final_action], || {
                                    AuditWitness::InstantaneousStep {
                                        action_prefix: actions.clone(),
                                        rewards: rewards.clone(),
                                        rewards_prime: pairs_prime
                                            .iter()
                                            .map(|&(_, r)| r)
                                            .collect(),
                                        final_action,
                                    }
                                });
                            if stop {
                                break 'scan;
                            }
                        }
                    }
                }
            }
        }
    }

    Ok(AuditReport {
        definition: AuditDefinition::InstantaneousDp,
        epsilon_claimed: policy.mechanism().map(Mechanism::epsilon),
        epsilon_measured: tracker.epsilon,
        witness: tracker.witness,
        horizon,
        alphabet: alphabet.to_vec(),
        identical_environments: false,
    })
}

/// Measured privacy level of an explicit channel matrix, with the (input,
/// input', output) index triple attaining it.
pub fn channel_epsilon(matrix: &[Vec<f64>]) -> (f64, Option<(usize, usize, usize)>) {
    let mut epsilon = 0.0f64;
    let mut indices = None;
    for i in 0..matrix.len() {
        for ip in (i + 1)..matrix.len() {
            for (o, (&p, &p_prime)) in matrix[i].iter().zip(&matrix[ip]).enumerate() {
                if p == 0.0 && p_prime == 0.0 {
                    continue;
                }
                if p == 0.0 || p_prime == 0.0 {
                    return (f64::INFINITY, Some((i, ip, o)));
                }
                let ratio = (p / p_prime).ln().abs();
                if ratio > epsilon {
                    epsilon = ratio;
                    indices = Some((i, ip, o));
                }
            }
        }
    }
    (epsilon, indices)
}

/// Audits a local mechanism's channel over a finite alphabet.
pub fn audit_local_mechanism(mechanism: &Mechanism, alphabet: &[f64]) -> Result<AuditReport> {
    let matrix = mechanism.channel_matrix(alphabet)?;
    let (epsilon, indices) = channel_epsilon(&matrix);
    let witness = indices.map(|(i, ip, o)| AuditWitness::Channel {
        input: alphabet[i],
        input_prime: alphabet[ip],
        output: alphabet[o],
    });
    Ok(AuditReport {
        definition: AuditDefinition::LocalMechanism,
        epsilon_claimed: Some(mechanism.epsilon()),
        epsilon_measured: epsilon,
        witness,
        horizon: 1,
        alphabet: alphabet.to_vec(),
        identical_environments: false,
    })
}

/// Applies a deterministic post-map to a channel's output column space.
/// Outputs mapped to the same value have their columns merged.
pub fn postprocess_channel(matrix: &[Vec<f64>], output_map: &[usize]) -> Vec<Vec<f64>> {
    let out_size = output_map.iter().copied().max().map_or(0, |m| m + 1);
    matrix
        .iter()
        .map(|row| {
            let mut merged = vec![0.0; out_size];
            for (o, &p) in row.iter().enumerate() {
                merged[output_map[o]] += p;
            }
            merged
        })
        .collect()
}

/// Audits the environment-privacy definition: the extreme
/// `|ln P₁(H_T) − ln P₂(H_T)| / ρ(ν₁, ν₂)` over all histories. The default
/// distance `ρ` is the L∞ distance between mean vectors.
pub fn audit_environment_privacy(
    policy: &Policy,
    env1: &Environment,
    env2: &Environment,
    horizon: usize,
    rho: Option<f64>,
    cap: u128,
) -> Result<AuditReport> {
    check_auditable(policy)?;
    if env1.num_arms() != env2.num_arms() {
        return Err(Error::DimensionMismatch {
            expected: env1.num_arms(),
            got: env2.num_arms(),
        });
    }
    let distance = match rho {
        Some(r) => {
            if r.is_nan() || r < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "distance must be nonnegative, got {r}"
                )));
            }
            r
        }
        None => env1
            .means()
            .iter()
            .zip(env2.means())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max),
    };

    let mut alphabet = env1.joint_alphabet();
    for x in env2.joint_alphabet() {
        if !alphabet.contains(&x) {
            alphabet.push(x);
        }
    }
    alphabet.sort_by(|a, b| a.partial_cmp(b).expect("finite supports"));

    let mut tracker = MaxTracker::new();
    for h in enumerate_histories(env1.num_arms(), &alphabet, horizon, cap)? {
        let p1 = history_probability(policy, env1, &h)?.value();
        let p2 = history_probability(policy, env2, &h)?.value();
        let witness = || AuditWitness::History {
            steps: h.steps().iter().map(|s| (s.action, s.reward)).collect(),
        };
        if tracker.observe(p1, p2, witness) {
            break;
        }
    }

    let (epsilon_measured, identical) = if distance == 0.0 {
        if tracker.epsilon == 0.0 {
            (0.0, true)
        } else {
            return Err(Error::UndefinedRatio);
        }
    } else {
        (tracker.epsilon / distance, false)
    };

    Ok(AuditReport {
        definition: AuditDefinition::Environment,
        epsilon_claimed: None,
        epsilon_measured,
        witness: tracker.witness,
        horizon,
        alphabet,
        identical_environments: identical,
    })
}

/// Re-evaluates a pan-DP witness from scratch; used to confirm that reported
/// maxima are reproducible.
pub fn reevaluate_pan_witness(
    policy: &Policy,
    num_arms: usize,
    witness: &AuditWitness,
) -> Result<f64> {
    match witness {
        AuditWitness::OutcomeMatrices {
            matrix,
            matrix_prime,
            actions,
        } => {
            let p = action_sequence_prob_on_outcomes(policy, num_arms, matrix, actions)?;
            let p_prime =
                action_sequence_prob_on_outcomes(policy, num_arms, matrix_prime, actions)?;
            Ok(log_ratio(p, p_prime))
        }
        AuditWitness::RewardSequences {
            actions,
            rewards,
            rewards_prime,
        } => {
            let p = action_sequence_prob_on_rewards(policy, num_arms, rewards, actions)?;
            let p_prime =
                action_sequence_prob_on_rewards(policy, num_arms, rewards_prime, actions)?;
            Ok(log_ratio(p, p_prime))
        }
        other => Err(Error::InvalidParameter(format!(
            "not a pan-DP witness: {other:?}"
        ))),
    }
}

/// Re-evaluates an instantaneous-DP witness from scratch.
pub fn reevaluate_instantaneous_witness(
    policy: &Policy,
    num_arms: usize,
    witness: &AuditWitness,
) -> Result<f64> {
    match witness {
        AuditWitness::InstantaneousStep {
            action_prefix,
            rewards,
            rewards_prime,
            final_action,
        } => {
            let pairs: Vec<(usize, f64)> = action_prefix
                .iter()
                .copied()
                .zip(rewards.iter().copied())
                .collect();
            let pairs_prime: Vec<(usize, f64)> = action_prefix
                .iter()
                .copied()
                .zip(rewards_prime.iter().copied())
                .collect();
            let base = policy.action_distribution(num_arms, &History::from_pairs(&pairs))?;
            let shifted =
                policy.action_distribution(num_arms, &History::from_pairs(&pairs_prime))?;
            Ok(log_ratio(base[*final_action], shifted[*final_action]))
        }
        other => Err(Error::InvalidParameter(format!(
            "not an instantaneous-DP witness: {other:?}"
        ))),
    }
}

/// Re-evaluates an environment-privacy witness from scratch.
pub fn reevaluate_environment_witness(
    policy: &Policy,
    env1: &Environment,
    env2: &Environment,
    distance: f64,
    witness: &AuditWitness,
) -> Result<f64> {
    match witness {
        AuditWitness::History { steps } => {
            let h = History::from_pairs(steps);
            let p1 = history_probability(policy, env1, &h)?.value();
            let p2 = history_probability(policy, env2, &h)?.value();
            Ok(log_ratio(p1, p2) / distance)
        }
        other => Err(Error::InvalidParameter(format!(
            "not an environment-privacy witness: {other:?}"
        ))),
    }
}

fn log_ratio(p: f64, p_prime: f64) -> f64 {
    if p == 0.0 && p_prime == 0.0 {
        0.0
    } else if p == 0.0 || p_prime == 0.0 {
        f64::INFINITY
    } else {
        (p / p_prime).ln().abs()
    }
}

/// Outcome- and reward-based audits of the same policy, which must agree.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub outcome_epsilon: f64,
    pub reward_epsilon: f64,
    pub difference: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Verifies that auditing with respect to full outcome matrices and with
/// respect to realized reward sequences measure the same privacy level.
pub fn verify_equivalence(
    policy: &Policy,
    num_arms: usize,
    alphabet: &[f64],
    horizon: usize,
    cap: u128,
    tolerance: f64,
) -> Result<EquivalenceReport> {
    let outcome = audit_pan_dp(policy, num_arms, alphabet, horizon, cap)?;
    let reward = audit_reward_dp(policy, num_arms, alphabet, horizon, cap)?;
    let (difference, passed) =
        if outcome.epsilon_measured.is_infinite() || reward.epsilon_measured.is_infinite() {
            let both = outcome.epsilon_measured == reward.epsilon_measured;
            (if both { 0.0 } else { f64::INFINITY }, both)
        } else {
            let d = (outcome.epsilon_measured - reward.epsilon_measured).abs();
            (d, d <= tolerance)
        };
    Ok(EquivalenceReport {
        outcome_epsilon: outcome.epsilon_measured,
        reward_epsilon: reward.epsilon_measured,
        difference,
        tolerance,
        passed,
    })
}

/// Composition relations between the pan and instantaneous audits:
/// `ε̂_inst ≤ 2·ε̂_pan` and `ε̂_pan ≤ T·ε̂_inst`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CompositionReport {
    pub pan_epsilon: f64,
    pub instantaneous_epsilon: f64,
    pub horizon: usize,
    pub instantaneous_le_twice_pan: bool,
    pub pan_le_horizon_times_instantaneous: bool,
    pub tolerance: f64,
}

impl CompositionReport {
    pub fn passed(&self) -> bool {
        self.instantaneous_le_twice_pan && self.pan_le_horizon_times_instantaneous
    }
}

/// Audits a policy under both the pan and instantaneous definitions and
/// checks the two-sided composition relations between the measured levels.
pub fn verify_composition(
    policy: &Policy,
    num_arms: usize,
    alphabet: &[f64],
    horizon: usize,
    cap: u128,
    tolerance: f64,
) -> Result<CompositionReport> {
    let pan = audit_pan_dp(policy, num_arms, alphabet, horizon, cap)?.epsilon_measured;
    let inst = audit_instantaneous_dp(policy, num_arms, alphabet, horizon, cap)?.epsilon_measured;
    let le = |lhs: f64, rhs: f64| rhs.is_infinite() || lhs <= rhs + tolerance;
    Ok(CompositionReport {
        pan_epsilon: pan,
        instantaneous_epsilon: inst,
        horizon,
        instantaneous_le_twice_pan: le(inst, 2.0 * pan),
        pan_le_horizon_times_instantaneous: le(pan, horizon as f64 * inst),
        tolerance,
    })
}
