//! Bandit decision rules.
//!
//! Policies come in two classes. *Auditable* policies (uniform,
//! softmax-empirical-mean, ldp-softmax over a finite channel) expose their
//! exact per-step action distribution given any history, which is what the
//! enumeration oracles and the privacy auditor consume. The UCB family is
//! simulation-only: deterministic index rules without a closed-form
//! distribution.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::History;
use crate::error::{Error, Result};
use crate::mechanism::{laplace_perturb, rr_debias, Mechanism};

/// Mean assigned to arms that have not been pulled yet, so that softmax
/// policies are auditable from the first step without forced exploration.
pub const UNPULLED_PRIOR_MEAN: f64 = 0.5;

/// Per-decision privacy budget for the instantaneous-DP construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EpsilonSchedule {
    Constant(f64),
    PerStep(Vec<f64>),
}

impl EpsilonSchedule {
    pub fn constant(epsilon: f64) -> Result<Self> {
        let s = EpsilonSchedule::Constant(epsilon);
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            EpsilonSchedule::Constant(e) => *e > 0.0,
            EpsilonSchedule::PerStep(v) => !v.is_empty() && v.iter().all(|&e| e > 0.0),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(
                "privacy schedule entries must be positive".into(),
            ))
        }
    }

    /// Budget for decision `t` (0-based); a per-step list repeats its last
    /// entry beyond its length.
    pub fn at(&self, t: usize) -> f64 {
        match self {
            EpsilonSchedule::Constant(e) => *e,
            EpsilonSchedule::PerStep(v) => v[t.min(v.len() - 1)],
        }
    }
}

/// Record of per-decision privacy spending over one episode.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PrivacyLedger {
    per_step: Vec<f64>,
}

impl PrivacyLedger {
    pub fn per_step(&self) -> &[f64] {
        &self.per_step
    }

    /// Composed budget after all recorded steps: `Σ_t ε_t`.
    pub fn cumulative(&self) -> f64 {
        self.per_step.iter().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.per_step.is_empty()
    }
}

/// Episode-local accumulators: pull counts, reward sums on both channels,
/// and the privacy ledger. Policies themselves stay immutable.
#[derive(Clone, Debug)]
pub struct PolicyState {
    counts: Vec<u64>,
    reward_sums: Vec<f64>,
    private_sums: Vec<f64>,
    total: u64,
    ledger: PrivacyLedger,
}

impl PolicyState {
    pub fn new(num_arms: usize) -> Self {
        Self {
            counts: vec![0; num_arms],
            reward_sums: vec![0.0; num_arms],
            private_sums: vec![0.0; num_arms],
            total: 0,
            ledger: PrivacyLedger::default(),
        }
    }

    /// Rebuilds the accumulators a policy would hold after observing
    /// `history`. Errors when the policy consumes the privatized channel and
    /// some step lacks it.
    pub fn from_history(history: &History, num_arms: usize, needs_private: bool) -> Result<Self> {
        let mut state = Self::new(num_arms);
        for (t, step) in history.steps().iter().enumerate() {
            if step.action >= num_arms {
                return Err(Error::ArmOutOfRange {
                    arm: step.action,
                    arms: num_arms,
                });
            }
            if needs_private && step.private_reward.is_none() {
                return Err(Error::MissingPrivatizedReward { step: t });
            }
            state.record(step.action, step.reward, step.private_reward, None);
        }
        Ok(state)
    }

    pub fn record(&mut self, arm: usize, reward: f64, private: Option<f64>, epsilon: Option<f64>) {
        self.counts[arm] += 1;
        self.reward_sums[arm] += reward;
        self.private_sums[arm] += private.unwrap_or(reward);
        self.total += 1;
        if let Some(e) = epsilon {
            self.ledger.per_step.push(e);
        }
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn ledger(&self) -> &PrivacyLedger {
        &self.ledger
    }

    pub(crate) fn into_ledger(self) -> PrivacyLedger {
        self.ledger
    }

    fn num_arms(&self) -> usize {
        self.counts.len()
    }

    fn observed_mean(&self, arm: usize) -> f64 {
        if self.counts[arm] == 0 {
            UNPULLED_PRIOR_MEAN
        } else {
            self.reward_sums[arm] / self.counts[arm] as f64
        }
    }

    fn private_mean(&self, arm: usize) -> f64 {
        if self.counts[arm] == 0 {
            UNPULLED_PRIOR_MEAN
        } else {
            self.private_sums[arm] / self.counts[arm] as f64
        }
    }
}

/// A bandit decision rule.
///
/// Policy configs parse from JSON such as
/// `{"kind":"ldp-softmax","beta":2.0,"mechanism":{"kind":"rr","epsilon":1.0}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPolicy", tag = "kind")]
pub enum Policy {
    #[serde(rename = "uniform")]
    Uniform,
    #[serde(rename = "softmax-empirical-mean")]
    Softmax { beta: f64 },
    #[serde(rename = "ucb1")]
    Ucb1 { exploration: f64 },
    #[serde(rename = "ldp-softmax")]
    LdpSoftmax { beta: f64, mechanism: Mechanism },
    #[serde(rename = "ldp-ucb")]
    LdpUcb {
        exploration: f64,
        mechanism: Mechanism,
    },
    #[serde(rename = "idp-noisy-ucb")]
    IdpNoisyUcb {
        exploration: f64,
        schedule: EpsilonSchedule,
    },
}

#[derive(Deserialize)]
#[serde(tag = "kind")]
enum RawPolicy {
    #[serde(rename = "uniform")]
    Uniform,
    #[serde(rename = "softmax-empirical-mean")]
    Softmax { beta: f64 },
    #[serde(rename = "ucb1")]
    Ucb1 {
        #[serde(default = "default_exploration")]
        exploration: f64,
    },
    #[serde(rename = "ldp-softmax")]
    LdpSoftmax { beta: f64, mechanism: Mechanism },
    #[serde(rename = "ldp-ucb")]
    LdpUcb {
        #[serde(default = "default_exploration")]
        exploration: f64,
        mechanism: Mechanism,
    },
    #[serde(rename = "idp-noisy-ucb")]
    IdpNoisyUcb {
        #[serde(default = "default_exploration")]
        exploration: f64,
        schedule: EpsilonSchedule,
    },
}

fn default_exploration() -> f64 {
    1.0
}

impl TryFrom<RawPolicy> for Policy {
    type Error = Error;

    fn try_from(raw: RawPolicy) -> Result<Self> {
        match raw {
            RawPolicy::Uniform => Ok(Policy::Uniform),
            RawPolicy::Softmax { beta } => Policy::softmax(beta),
            RawPolicy::Ucb1 { exploration } => Policy::ucb1(exploration),
            RawPolicy::LdpSoftmax { beta, mechanism } => {
                ldp_pipeline(&Policy::softmax(beta)?, &mechanism)
            }
            RawPolicy::LdpUcb {
                exploration,
                mechanism,
            } => ldp_pipeline(&Policy::ucb1(exploration)?, &mechanism),
            RawPolicy::IdpNoisyUcb {
                exploration,
                schedule,
            } => Policy::idp_noisy_ucb(exploration, schedule),
        }
    }
}

impl Policy {
    pub fn uniform() -> Self {
        Policy::Uniform
    }

    pub fn softmax(beta: f64) -> Result<Self> {
        if !beta.is_finite() || beta < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "softmax inverse temperature must be finite and nonnegative, got {beta}"
            )));
        }
        Ok(Policy::Softmax { beta })
    }

    pub fn ucb1(exploration: f64) -> Result<Self> {
        if !exploration.is_finite() || exploration < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "exploration constant must be finite and nonnegative, got {exploration}"
            )));
        }
        Ok(Policy::Ucb1 { exploration })
    }

    /// UCB1 on Laplace-perturbed empirical sums: one fresh noise draw per arm
    /// per decision, with the per-decision budget taken from `schedule` and
    /// recorded in the episode's privacy ledger.
    pub fn idp_noisy_ucb(exploration: f64, schedule: EpsilonSchedule) -> Result<Self> {
        if !exploration.is_finite() || exploration < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "exploration constant must be finite and nonnegative, got {exploration}"
            )));
        }
        schedule.validate()?;
        Ok(Policy::IdpNoisyUcb {
            exploration,
            schedule,
        })
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Policy::Uniform => "uniform",
            Policy::Softmax { .. } => "softmax-empirical-mean",
            Policy::Ucb1 { .. } => "ucb1",
            Policy::LdpSoftmax { .. } => "ldp-softmax",
            Policy::LdpUcb { .. } => "ldp-ucb",
            Policy::IdpNoisyUcb { .. } => "idp-noisy-ucb",
        }
    }

    /// Whether the policy exposes an exact, closed-form action distribution
    /// for every history.
    pub fn auditable(&self) -> bool {
        match self {
            Policy::Uniform | Policy::Softmax { .. } => true,
            Policy::LdpSoftmax { mechanism, .. } => mechanism.is_finite_channel(),
            _ => false,
        }
    }

    /// The local mechanism feeding this policy's reward channel, if any.
    pub fn mechanism(&self) -> Option<&Mechanism> {
        match self {
            Policy::LdpSoftmax { mechanism, .. } | Policy::LdpUcb { mechanism, .. } => {
                Some(mechanism)
            }
            _ => None,
        }
    }

    /// Whether the policy reads only the privatized reward channel.
    pub fn requires_private_channel(&self) -> bool {
        self.mechanism().is_some()
    }

    /// Privacy budget charged by decision `t`, for ledger keeping.
    pub fn step_epsilon(&self, t: usize) -> Option<f64> {
        match self {
            Policy::IdpNoisyUcb { schedule, .. } => Some(schedule.at(t)),
            _ => None,
        }
    }

    /// Exact action distribution given a history (auditable policies only).
    ///
    /// For ldp-softmax the distribution depends on what the history carries:
    /// with the privatized channel present it is the base softmax on the
    /// privatized empirical means; on a raw `(action, reward)` history it is
    /// the exact marginal over the mechanism's randomness, conditioned on the
    /// actions taken.
    pub fn action_distribution(&self, num_arms: usize, history: &History) -> Result<Vec<f64>> {
        for step in history.steps() {
            if step.action >= num_arms {
                return Err(Error::ArmOutOfRange {
                    arm: step.action,
                    arms: num_arms,
                });
            }
        }
        match self {
            Policy::Uniform => Ok(vec![1.0 / num_arms as f64; num_arms]),
            Policy::Softmax { beta } => {
                let state = PolicyState::from_history(history, num_arms, false)?;
                Ok(softmax_distribution(
                    *beta,
                    &(0..num_arms)
                        .map(|a| state.observed_mean(a))
                        .collect::<Vec<_>>(),
                ))
            }
            Policy::LdpSoftmax { beta, mechanism } => {
                ldp_softmax_distribution(*beta, mechanism, num_arms, history)
            }
            other => Err(Error::NotAuditable(other.kind_name().into())),
        }
    }

    /// Samples the next arm given a history. Auditable policies sample their
    /// exact action distribution; the UCB family maximizes its index with
    /// forced round-robin over unpulled arms and lowest-index tie-breaking.
    pub fn select_action(
        &self,
        num_arms: usize,
        history: &History,
        rng: &mut impl Rng,
    ) -> Result<usize> {
        if self.auditable() {
            let dist = self.action_distribution(num_arms, history)?;
            return Ok(sample_index(&dist, rng));
        }
        let state = PolicyState::from_history(history, num_arms, self.requires_private_channel())?;
        self.decide(&state, rng)
    }

    /// Chooses the next arm from episode-local accumulators; the fast path
    /// used by `run_episode`.
    pub fn decide(&self, state: &PolicyState, rng: &mut impl Rng) -> Result<usize> {
        let k = state.num_arms();
        match self {
            Policy::Uniform => Ok(rng.random_range(0..k)),
            Policy::Softmax { beta } => {
                let means: Vec<f64> = (0..k).map(|a| state.observed_mean(a)).collect();
                Ok(sample_index(&softmax_distribution(*beta, &means), rng))
            }
            Policy::LdpSoftmax { beta, .. } => {
                let means: Vec<f64> = (0..k).map(|a| state.private_mean(a)).collect();
                Ok(sample_index(&softmax_distribution(*beta, &means), rng))
            }
            Policy::Ucb1 { exploration } => {
                Ok(ucb_argmax(state, exploration, |s, a| s.observed_mean(a)))
            }
            Policy::LdpUcb {
                exploration,
                mechanism,
            } => {
                let eps = mechanism.epsilon();
                Ok(ucb_argmax(state, exploration, |s, a| {
                    rr_debias(s.private_mean(a), eps)
                }))
            }
            Policy::IdpNoisyUcb {
                exploration,
                schedule,
            } => {
                if let Some(unpulled) = first_unpulled(state) {
                    return Ok(unpulled);
                }
                let eps = schedule.at(state.total as usize);
                let t = state.total as f64;
                let mut best = 0usize;
                let mut best_index = f64::NEG_INFINITY;
                for a in 0..k {
                    let noisy_sum = if eps.is_infinite() {
                        state.reward_sums[a]
                    } else {
                        laplace_perturb(state.reward_sums[a], 1.0, eps, rng)?
                    };
                    let n = state.counts[a] as f64;
                    let index = noisy_sum / n + exploration * (2.0 * t.ln() / n).sqrt();
                    if index > best_index {
                        best_index = index;
                        best = a;
                    }
                }
                Ok(best)
            }
        }
    }
}

/// Wraps a base policy so that it consumes only privatized rewards produced
/// by `mechanism`. The uniform policy reads no rewards and passes through
/// unchanged.
pub fn ldp_pipeline(base: &Policy, mechanism: &Mechanism) -> Result<Policy> {
    match base {
        Policy::Uniform => Ok(Policy::Uniform),
        Policy::Softmax { beta } => Ok(Policy::LdpSoftmax {
            beta: *beta,
            mechanism: mechanism.clone(),
        }),
        Policy::Ucb1 { exploration } => Ok(Policy::LdpUcb {
            exploration: *exploration,
            mechanism: mechanism.clone(),
        }),
        other => Err(Error::InvalidParameter(format!(
            "policy kind `{}` is already private",
            other.kind_name()
        ))),
    }
}

fn first_unpulled(state: &PolicyState) -> Option<usize> {
    state.counts.iter().position(|&n| n == 0)
}

fn ucb_argmax(
    state: &PolicyState,
    exploration: &f64,
    mean: impl Fn(&PolicyState, usize) -> f64,
) -> usize {
    if let Some(unpulled) = first_unpulled(state) {
        return unpulled;
    }
    let t = state.total as f64;
    let mut best = 0usize;
    let mut best_index = f64::NEG_INFINITY;
    for a in 0..state.num_arms() {
        let n = state.counts[a] as f64;
        let index = mean(state, a) + exploration * (2.0 * t.ln() / n).sqrt();
        if index > best_index {
            best_index = index;
            best = a;
        }
    }
    best
}

/// Numerically stable softmax of `beta * means`.
fn softmax_distribution(beta: f64, means: &[f64]) -> Vec<f64> {
    let top = means
        .iter()
        .map(|m| beta * m)
        .fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = means.iter().map(|m| (beta * m - top).exp()).collect();
    let sum: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / sum).collect()
}

fn sample_index(probs: &[f64], rng: &mut impl Rng) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

/// Exact marginal action distribution of the (mechanism ∘ softmax)
/// composition on a raw history: sums over every privatized-reward assignment
/// consistent with the observed rewards and chosen actions.
fn ldp_softmax_distribution(
    beta: f64,
    mechanism: &Mechanism,
    num_arms: usize,
    history: &History,
) -> Result<Vec<f64>> {
    let channel_present: Vec<bool> = history
        .steps()
        .iter()
        .map(|s| s.private_reward.is_some())
        .collect();
    if channel_present.iter().all(|&b| b) && !history.is_empty() {
        let state = PolicyState::from_history(history, num_arms, true)?;
        let means: Vec<f64> = (0..num_arms).map(|a| state.private_mean(a)).collect();
        return Ok(softmax_distribution(beta, &means));
    }
    if channel_present.iter().any(|&b| b) {
        return Err(Error::InvalidParameter(
            "history mixes privatized and raw steps".into(),
        ));
    }
    match mechanism {
        Mechanism::Identity => {
            let state = PolicyState::from_history(history, num_arms, false)?;
            let means: Vec<f64> = (0..num_arms).map(|a| state.observed_mean(a)).collect();
            Ok(softmax_distribution(beta, &means))
        }
        Mechanism::RandomizedResponse { .. } => {
            let t = history.len();
            if t > 24 {
                return Err(Error::EnumerationBudget {
                    required: 1u128 << t,
                    cap: 1 << 24,
                });
            }
            let channel = mechanism.channel_matrix(&[0.0, 1.0])?;
            for (i, step) in history.steps().iter().enumerate() {
                if step.reward != 0.0 && step.reward != 1.0 {
                    return Err(Error::NonBinarySupport(format!(
                        "reward {} at step {i}",
                        step.reward
                    )));
                }
            }
            let mut numerators = vec![0.0; num_arms];
            let mut denominator = 0.0;
            let mut private_sums = vec![0.0f64; num_arms];
            let mut counts = vec![0u64; num_arms];
            marginalize_rr(
                beta,
                &channel,
                history,
                num_arms,
                0,
                1.0,
                &mut private_sums,
                &mut counts,
                &mut numerators,
                &mut denominator,
            );
            Ok(numerators.into_iter().map(|n| n / denominator).collect())
        }
        Mechanism::Laplace { .. } => Err(Error::NotAuditable(
            "ldp-softmax over a sampled-only mechanism".into(),
        )),
    }
}

/// Depth-first sum over privatized bit assignments. `weight` carries
/// `∏_s M(z_s | x_s) · π(a_s | z-prefix)` for the steps fixed so far.
#[allow(clippy::too_many_arguments)]
fn marginalize_rr(
    beta: f64,
    channel: &[Vec<f64>],
    history: &History,
    num_arms: usize,
    depth: usize,
    weight: f64,
    private_sums: &mut [f64],
    counts: &mut [u64],
    numerators: &mut [f64],
    denominator: &mut f64,
) {
    let means = |sums: &[f64], counts: &[u64]| -> Vec<f64> {
        (0..num_arms)
            .map(|a| {
                if counts[a] == 0 {
                    UNPULLED_PRIOR_MEAN
                } else {
                    sums[a] / counts[a] as f64
                }
            })
            .collect()
    };
    if depth == history.len() {
        let dist = softmax_distribution(beta, &means(private_sums, counts));
        for a in 0..num_arms {
            numerators[a] += weight * dist[a];
        }
        *denominator += weight;
        return;
    }
    let step = history.steps()[depth];
    let x = step.reward as usize;
    let action_prob = softmax_distribution(beta, &means(private_sums, counts))[step.action];
    for z in 0..2usize {
        let w = weight * channel[x][z] * action_prob;
        if w == 0.0 {
            continue;
        }
        private_sums[step.action] += z as f64;
        counts[step.action] += 1;
        marginalize_rr(
            beta,
            channel,
            history,
            num_arms,
            depth + 1,
            w,
            private_sums,
            counts,
            numerators,
            denominator,
        );
        counts[step.action] -= 1;
        private_sums[step.action] -= z as f64;
    }
}
