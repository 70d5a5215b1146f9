//! Stochastic bandit environments, histories, and the canonical product
//! probability measure over observed histories.
//!
//! Rewards live on finite supports inside `[0, 1]` so that history spaces can
//! be enumerated exactly; continuous distributions are represented by finite
//! grids at whatever resolution the caller needs.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::policy::Policy;

/// Cap on the number of states `enumerate_histories` will agree to visit.
pub const DEFAULT_ENUMERATION_CAP: u128 = 10_000_000;

/// A reward distribution over a finite set of values in `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawArm")]
pub struct RewardDistribution {
    support: Vec<f64>,
    probs: Vec<f64>,
}

#[derive(Deserialize)]
struct RawArm {
    support: Vec<f64>,
    probs: Vec<f64>,
}

impl TryFrom<RawArm> for RewardDistribution {
    type Error = Error;

    fn try_from(raw: RawArm) -> Result<Self> {
        RewardDistribution::new(raw.support, raw.probs)
    }
}

impl RewardDistribution {
    /// Validates and builds a distribution. The probability vector must be
    /// nonnegative and sum to 1 within 1e-12; support values must lie in
    /// `[0, 1]` and be distinct.
    pub fn new(support: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if support.len() != probs.len() {
            return Err(Error::DimensionMismatch {
                expected: support.len(),
                got: probs.len(),
            });
        }
        if support.is_empty() {
            return Err(Error::InvalidDistribution("empty support".into()));
        }
        for &x in &support {
            if !(0.0..=1.0).contains(&x) {
                return Err(Error::InvalidDistribution(format!(
                    "support value {x} outside [0, 1]"
                )));
            }
        }
        for i in 0..support.len() {
            for j in (i + 1)..support.len() {
                if support[i] == support[j] {
                    return Err(Error::InvalidDistribution(format!(
                        "duplicate support value {}",
                        support[i]
                    )));
                }
            }
        }
        let mut sum = 0.0;
        for &p in &probs {
            if p.is_nan() || p < 0.0 {
                return Err(Error::InvalidDistribution(format!(
                    "negative probability {p}"
                )));
            }
            sum += p;
        }
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {sum}, not 1"
            )));
        }
        Ok(Self { support, probs })
    }

    /// Bernoulli distribution on `{0, 1}` with success probability `p`.
    pub fn bernoulli(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!(
                "Bernoulli parameter {p} outside [0, 1]"
            )));
        }
        Self::new(vec![0.0, 1.0], vec![1.0 - p, p])
    }

    /// Point mass on a single value.
    pub fn degenerate(value: f64) -> Result<Self> {
        Self::new(vec![value], vec![1.0])
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn mean(&self) -> f64 {
        self.support
            .iter()
            .zip(&self.probs)
            .map(|(x, p)| x * p)
            .sum()
    }

    /// Probability mass at `x`; zero when `x` is not a support value.
    pub fn prob_of(&self, x: f64) -> f64 {
        self.support
            .iter()
            .position(|&s| s == x)
            .map_or(0.0, |i| self.probs[i])
    }

    pub fn in_support(&self, x: f64) -> bool {
        self.support.contains(&x)
    }

    /// Whether the support is exactly `{0, 1}` (in either order).
    pub fn is_binary(&self) -> bool {
        self.support.len() == 2 && self.support.contains(&0.0) && self.support.contains(&1.0)
    }

    pub fn sample(&self, rng: &mut impl Rng) -> f64 {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (x, p) in self.support.iter().zip(&self.probs) {
            acc += p;
            if u < acc {
                return *x;
            }
        }
        // Falls through only when u lands in the residual rounding mass.
        *self.support.last().expect("non-empty support")
    }
}

/// A stochastic `K`-armed environment over finite reward distributions.
///
/// Means, the optimal mean, and suboptimality gaps are always recomputed from
/// the arm distributions rather than cached.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawEnvironment")]
pub struct Environment {
    arms: Vec<RewardDistribution>,
}

#[derive(Deserialize)]
struct RawEnvironment {
    arms: Vec<RewardDistribution>,
}

impl TryFrom<RawEnvironment> for Environment {
    type Error = Error;

    fn try_from(raw: RawEnvironment) -> Result<Self> {
        Environment::new(raw.arms)
    }
}

impl Environment {
    pub fn new(arms: Vec<RewardDistribution>) -> Result<Self> {
        if arms.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "an environment needs at least 2 arms, got {}",
                arms.len()
            )));
        }
        Ok(Self { arms })
    }

    /// Environment of Bernoulli arms with the given means.
    pub fn bernoulli(means: &[f64]) -> Result<Self> {
        Self::new(
            means
                .iter()
                .map(|&p| RewardDistribution::bernoulli(p))
                .collect::<Result<_>>()?,
        )
    }

    pub fn num_arms(&self) -> usize {
        self.arms.len()
    }

    pub fn arm(&self, a: usize) -> Result<&RewardDistribution> {
        self.arms.get(a).ok_or(Error::ArmOutOfRange {
            arm: a,
            arms: self.arms.len(),
        })
    }

    pub fn arms(&self) -> &[RewardDistribution] {
        &self.arms
    }

    pub fn means(&self) -> Vec<f64> {
        self.arms.iter().map(RewardDistribution::mean).collect()
    }

    pub fn optimal_mean(&self) -> f64 {
        self.means().into_iter().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Index of the optimal arm, lowest index on ties.
    pub fn optimal_arm(&self) -> usize {
        let means = self.means();
        let best = self.optimal_mean();
        means.iter().position(|&m| m == best).unwrap_or(0)
    }

    /// Suboptimality gaps `μ* − μ_a`, all nonnegative.
    pub fn gaps(&self) -> Vec<f64> {
        let best = self.optimal_mean();
        self.means().into_iter().map(|m| best - m).collect()
    }

    /// Sorted union of every arm's support values.
    pub fn joint_alphabet(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for arm in &self.arms {
            for &x in arm.support() {
                if !out.contains(&x) {
                    out.push(x);
                }
            }
        }
        out.sort_by(|a, b| a.partial_cmp(b).expect("finite supports"));
        out
    }
}

/// Draws one reward from arm `arm` of `env`. Deterministic given the state of
/// `rng`.
pub fn sample_reward(env: &Environment, arm: usize, rng: &mut impl Rng) -> Result<f64> {
    Ok(env.arm(arm)?.sample(rng))
}

/// One observed step: the chosen arm, the observed reward, and the privatized
/// reward when a local mechanism is in the loop.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Step {
    pub action: usize,
    pub reward: f64,
    pub private_reward: Option<f64>,
}

/// An observed history: the ordered `(action, reward)` sequence, with an
/// optional privatized-reward channel.
///
/// Serializes as a JSON array of `[action, reward]` pairs; the privatized
/// channel is runtime-only and not part of the wire format.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<(usize, f64)>", into = "Vec<(usize, f64)>")]
pub struct History {
    steps: Vec<Step>,
}

impl From<Vec<(usize, f64)>> for History {
    fn from(pairs: Vec<(usize, f64)>) -> Self {
        Self::from_pairs(&pairs)
    }
}

impl From<History> for Vec<(usize, f64)> {
    fn from(h: History) -> Self {
        h.steps.iter().map(|s| (s.action, s.reward)).collect()
    }
}

impl History {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: &[(usize, f64)]) -> Self {
        Self {
            steps: pairs
                .iter()
                .map(|&(action, reward)| Step {
                    action,
                    reward,
                    private_reward: None,
                })
                .collect(),
        }
    }

    pub fn push(&mut self, action: usize, reward: f64) {
        self.steps.push(Step {
            action,
            reward,
            private_reward: None,
        });
    }

    pub fn push_private(&mut self, action: usize, reward: f64, private_reward: f64) {
        self.steps.push(Step {
            action,
            reward,
            private_reward: Some(private_reward),
        });
    }

    pub fn pop(&mut self) -> Option<Step> {
        self.steps.pop()
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    /// Prefix of the first `t` steps.
    pub fn prefix(&self, t: usize) -> History {
        Self {
            steps: self.steps[..t].to_vec(),
        }
    }

    /// Pull counts `N_a(T)`; always sums to the history length.
    pub fn pull_counts(&self, num_arms: usize) -> Result<Vec<u64>> {
        let mut counts = vec![0u64; num_arms];
        for step in &self.steps {
            if step.action >= num_arms {
                return Err(Error::ArmOutOfRange {
                    arm: step.action,
                    arms: num_arms,
                });
            }
            counts[step.action] += 1;
        }
        Ok(counts)
    }
}

/// A `K × T` matrix of generated outcomes: one column per time step, one row
/// per arm, as produced by the environment before any arm is chosen.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratedOutcomes {
    values: Vec<Vec<f64>>,
}

impl GeneratedOutcomes {
    /// Validates entries against the environment's per-arm supports.
    pub fn new(values: Vec<Vec<f64>>, env: &Environment) -> Result<Self> {
        if values.len() != env.num_arms() {
            return Err(Error::DimensionMismatch {
                expected: env.num_arms(),
                got: values.len(),
            });
        }
        let horizon = values.first().map_or(0, Vec::len);
        for (a, row) in values.iter().enumerate() {
            if row.len() != horizon {
                return Err(Error::DimensionMismatch {
                    expected: horizon,
                    got: row.len(),
                });
            }
            let arm = env.arm(a)?;
            for &x in row {
                if !arm.in_support(x) {
                    return Err(Error::InvalidDistribution(format!(
                        "outcome {x} not in arm {a}'s support"
                    )));
                }
            }
        }
        Ok(Self { values })
    }

    /// Draws a full outcome matrix: every arm generates a value at every
    /// step, whether or not the learner would observe it.
    pub fn generate(env: &Environment, horizon: usize, rng: &mut impl Rng) -> Self {
        let values = env
            .arms()
            .iter()
            .map(|arm| (0..horizon).map(|_| arm.sample(rng)).collect())
            .collect();
        Self { values }
    }

    pub fn num_arms(&self) -> usize {
        self.values.len()
    }

    pub fn horizon(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    pub fn value(&self, arm: usize, t: usize) -> f64 {
        self.values[arm][t]
    }

    /// Rewards the learner observes when playing `actions` against this
    /// fixed outcome matrix.
    pub fn realize(&self, actions: &[usize]) -> Result<Vec<f64>> {
        if actions.len() != self.horizon() {
            return Err(Error::DimensionMismatch {
                expected: self.horizon(),
                got: actions.len(),
            });
        }
        actions
            .iter()
            .enumerate()
            .map(|(t, &a)| {
                self.values
                    .get(a)
                    .map(|row| row[t])
                    .ok_or(Error::ArmOutOfRange {
                        arm: a,
                        arms: self.values.len(),
                    })
            })
            .collect()
    }
}

/// Expected cumulative regret `Σ_a counts[a] · (μ* − μ_a)` for the given
/// (possibly fractional) pull counts.
pub fn expected_regret(env: &Environment, pull_counts: &[f64]) -> Result<f64> {
    if pull_counts.len() != env.num_arms() {
        return Err(Error::DimensionMismatch {
            expected: env.num_arms(),
            got: pull_counts.len(),
        });
    }
    for &c in pull_counts {
        if c.is_nan() || c < 0.0 {
            return Err(Error::InvalidParameter(format!("negative pull count {c}")));
        }
    }
    Ok(env
        .gaps()
        .iter()
        .zip(pull_counts)
        .map(|(gap, c)| gap * c)
        .sum())
}

/// Probability of a history under the canonical product measure
/// `∏_t π(A_t | H_{t−1}) · f_{A_t}(X_t)`.
///
/// `OffSupport` marks a structurally impossible history (a reward outside the
/// chosen arm's support), as opposed to a density that underflowed to zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum HistoryProb {
    OffSupport { step: usize },
    Density(f64),
}

impl HistoryProb {
    pub fn value(&self) -> f64 {
        match self {
            HistoryProb::OffSupport { .. } => 0.0,
            HistoryProb::Density(p) => *p,
        }
    }

    pub fn is_off_support(&self) -> bool {
        matches!(self, HistoryProb::OffSupport { .. })
    }
}

/// Exact probability of `history` under `policy` and `env` (Eq. of the
/// canonical model). The empty history has probability 1. Requires an
/// auditable policy.
pub fn history_probability(
    policy: &Policy,
    env: &Environment,
    history: &History,
) -> Result<HistoryProb> {
    let k = env.num_arms();
    let mut prob = 1.0;
    let mut prefix = History::new();
    for (t, step) in history.steps().iter().enumerate() {
        let arm = env.arm(step.action)?;
        if !arm.in_support(step.reward) {
            return Ok(HistoryProb::OffSupport { step: t });
        }
        let dist = policy.action_distribution(k, &prefix)?;
        prob *= dist[step.action] * arm.prob_of(step.reward);
        prefix.steps.push(*step);
    }
    Ok(HistoryProb::Density(prob))
}

/// Streams every `(action, reward)` history of length `horizon` with actions
/// in `[0, K)` and rewards drawn from `alphabet`, in lexicographic order of
/// per-step `(action, reward index)` digits.
pub fn enumerate_histories(
    num_arms: usize,
    alphabet: &[f64],
    horizon: usize,
    cap: u128,
) -> Result<HistoryEnumerator> {
    if num_arms == 0 || alphabet.is_empty() {
        return Err(Error::InvalidParameter(
            "enumeration needs at least one arm and one alphabet value".into(),
        ));
    }
    let base = (num_arms as u128) * (alphabet.len() as u128);
    let mut total: u128 = 1;
    for _ in 0..horizon {
        total = total.checked_mul(base).ok_or(Error::EnumerationBudget {
            required: u128::MAX,
            cap,
        })?;
    }
    if total > cap {
        return Err(Error::EnumerationBudget {
            required: total,
            cap,
        });
    }
    Ok(HistoryEnumerator {
        num_arms,
        alphabet: alphabet.to_vec(),
        horizon,
        next: 0,
        total,
    })
}

/// Iterator over all histories of a fixed length; see [`enumerate_histories`].
#[derive(Clone, Debug)]
pub struct HistoryEnumerator {
    num_arms: usize,
    alphabet: Vec<f64>,
    horizon: usize,
    next: u128,
    total: u128,
}

impl HistoryEnumerator {
    pub fn total(&self) -> u128 {
        self.total
    }
}

impl Iterator for HistoryEnumerator {
    type Item = History;

    fn next(&mut self) -> Option<History> {
        if self.next >= self.total {
            return None;
        }
        let m = self.alphabet.len() as u128;
        let base = (self.num_arms as u128) * m;
        let mut code = self.next;
        self.next += 1;
        // Most significant digit encodes the first step.
        let mut steps = vec![
            Step {
                action: 0,
                reward: 0.0,
                private_reward: None
            };
            self.horizon
        ];
        for t in (0..self.horizon).rev() {
            let digit = code % base;
            code /= base;
            steps[t].action = (digit / m) as usize;
            steps[t].reward = self.alphabet[(digit % m) as usize];
        }
        Some(History { steps })
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let rem = (self.total - self.next) as usize;
        (rem, Some(rem))
    }
}

/// A completed episode: the observed history plus the policy's per-step
/// privacy ledger (empty unless the policy spends budget per decision).
#[derive(Clone, Debug)]
pub struct Episode {
    pub history: History,
    pub ledger: crate::policy::PrivacyLedger,
}

/// Plays `policy` against `env` for `horizon` steps. At each step the action
/// is drawn from the policy given the prefix, the reward from the chosen arm,
/// and, for locally private policies, the privatized reward from the
/// mechanism.
pub fn run_episode(
    policy: &Policy,
    env: &Environment,
    horizon: usize,
    rng: &mut impl Rng,
) -> Result<Episode> {
    if horizon == 0 {
        return Err(Error::InvalidParameter("horizon must be at least 1".into()));
    }
    if let Some(mech) = policy.mechanism() {
        for (a, arm) in env.arms().iter().enumerate() {
            if mech.requires_binary_input() && !arm.is_binary() {
                return Err(Error::NonBinarySupport(format!(
                    "arm {a} has support {:?}",
                    arm.support()
                )));
            }
        }
    }
    let k = env.num_arms();
    let mut state = crate::policy::PolicyState::new(k);
    let mut history = History::new();
    for t in 0..horizon {
        let action = policy.decide(&state, rng)?;
        if action >= k {
            return Err(Error::ArmOutOfRange {
                arm: action,
                arms: k,
            });
        }
        let reward = env.arm(action)?.sample(rng);
        let private = match policy.mechanism() {
            Some(mech) => Some(mech.randomize(reward, rng)?),
            None => None,
        };
        state.record(action, reward, private, policy.step_epsilon(t));
        match private {
            Some(z) => history.push_private(action, reward, z),
            None => history.push(action, reward),
        }
    }
    Ok(Episode {
        history,
        ledger: state.into_ledger(),
    })
}
