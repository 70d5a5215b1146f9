//! Local privacy mechanisms: reward randomizers with a declared privacy
//! level, and the corrupted reward distributions they induce.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::RewardDistribution;
use crate::error::{Error, Result};

/// A per-reward randomizer. `epsilon` is the declared privacy level of the
/// channel; the identity mechanism carries the `∞` sentinel.
///
/// Configured in experiment files as e.g. `{"kind":"rr","epsilon":1.0}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMechanism", tag = "kind", rename_all = "lowercase")]
pub enum Mechanism {
    Identity,
    #[serde(rename = "rr")]
    RandomizedResponse {
        epsilon: f64,
    },
    Laplace {
        epsilon: f64,
        sensitivity: f64,
    },
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum RawMechanism {
    Identity,
    #[serde(rename = "rr")]
    RandomizedResponse {
        epsilon: f64,
    },
    Laplace {
        epsilon: f64,
        #[serde(default = "default_sensitivity")]
        sensitivity: f64,
    },
}

fn default_sensitivity() -> f64 {
    1.0
}

impl TryFrom<RawMechanism> for Mechanism {
    type Error = Error;

    fn try_from(raw: RawMechanism) -> Result<Self> {
        match raw {
            RawMechanism::Identity => Ok(Mechanism::Identity),
            RawMechanism::RandomizedResponse { epsilon } => Mechanism::randomized_response(epsilon),
            RawMechanism::Laplace {
                epsilon,
                sensitivity,
            } => Mechanism::laplace(epsilon, sensitivity),
        }
    }
}

impl Mechanism {
    pub fn identity() -> Self {
        Mechanism::Identity
    }

    /// Binary randomized response at level `epsilon > 0`. An infinite epsilon
    /// degenerates to the identity map on `{0, 1}`.
    pub fn randomized_response(epsilon: f64) -> Result<Self> {
        if epsilon.is_nan() || epsilon <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "randomized response requires epsilon > 0, got {epsilon}"
            )));
        }
        Ok(Mechanism::RandomizedResponse { epsilon })
    }

    pub fn laplace(epsilon: f64, sensitivity: f64) -> Result<Self> {
        if epsilon.is_nan() || epsilon <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "Laplace mechanism requires epsilon > 0, got {epsilon}"
            )));
        }
        if !sensitivity.is_finite() || sensitivity <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "Laplace mechanism requires finite sensitivity > 0, got {sensitivity}"
            )));
        }
        Ok(Mechanism::Laplace {
            epsilon,
            sensitivity,
        })
    }

    /// Declared privacy level; `∞` for the identity mechanism.
    pub fn epsilon(&self) -> f64 {
        match self {
            Mechanism::Identity => f64::INFINITY,
            Mechanism::RandomizedResponse { epsilon } => *epsilon,
            Mechanism::Laplace { epsilon, .. } => *epsilon,
        }
    }

    pub fn requires_binary_input(&self) -> bool {
        matches!(self, Mechanism::RandomizedResponse { .. })
    }

    /// Whether the channel admits an explicit finite transition matrix.
    pub fn is_finite_channel(&self) -> bool {
        !matches!(self, Mechanism::Laplace { .. })
    }

    /// Applies the mechanism to one reward.
    pub fn randomize(&self, reward: f64, rng: &mut impl Rng) -> Result<f64> {
        match self {
            Mechanism::Identity => Ok(reward),
            Mechanism::RandomizedResponse { epsilon } => randomized_response(reward, *epsilon, rng),
            Mechanism::Laplace {
                epsilon,
                sensitivity,
            } => laplace_perturb(reward, *sensitivity, *epsilon, rng),
        }
    }

    /// Transition matrix over `alphabet` (rows: inputs, columns: outputs).
    /// Each row sums to 1. The Laplace mechanism has no finite channel.
    pub fn channel_matrix(&self, alphabet: &[f64]) -> Result<Vec<Vec<f64>>> {
        match self {
            Mechanism::Identity => {
                let n = alphabet.len();
                Ok((0..n)
                    .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                    .collect())
            }
            Mechanism::RandomizedResponse { epsilon } => {
                check_binary_alphabet(alphabet)?;
                let keep = rr_keep_probability(*epsilon);
                let flip = rr_flip_probability(*epsilon);
                Ok((0..2)
                    .map(|i| (0..2).map(|j| if i == j { keep } else { flip }).collect())
                    .collect())
            }
            Mechanism::Laplace { .. } => Err(Error::InvalidParameter(
                "the Laplace mechanism is sampled-only and has no finite channel".into(),
            )),
        }
    }

    /// Pushforward of a reward distribution through the mechanism.
    pub fn corrupt(&self, f: &RewardDistribution) -> Result<CorruptedDistribution> {
        match self {
            Mechanism::Identity => Ok(CorruptedDistribution::Exact(f.clone())),
            Mechanism::RandomizedResponse { epsilon } => Ok(CorruptedDistribution::Exact(
                corrupt_distribution(f, *epsilon)?,
            )),
            Mechanism::Laplace { .. } => Ok(CorruptedDistribution::SampledOnly {
                mechanism: self.clone(),
            }),
        }
    }
}

/// The distribution of privatized rewards: explicit for finite channels,
/// sampled-only for the Laplace mechanism.
#[derive(Clone, Debug, PartialEq)]
pub enum CorruptedDistribution {
    Exact(RewardDistribution),
    SampledOnly { mechanism: Mechanism },
}

impl CorruptedDistribution {
    pub fn exact(&self) -> Option<&RewardDistribution> {
        match self {
            CorruptedDistribution::Exact(d) => Some(d),
            CorruptedDistribution::SampledOnly { .. } => None,
        }
    }
}

fn check_binary_alphabet(alphabet: &[f64]) -> Result<()> {
    let binary = alphabet.len() == 2 && alphabet.contains(&0.0) && alphabet.contains(&1.0);
    if !binary {
        return Err(Error::NonBinarySupport(format!("{alphabet:?}")));
    }
    Ok(())
}

/// Probability that randomized response keeps its input: `e^ε / (1 + e^ε)`.
pub fn rr_keep_probability(epsilon: f64) -> f64 {
    if epsilon.is_infinite() {
        return 1.0;
    }
    1.0 / (1.0 + (-epsilon).exp())
}

fn rr_flip_probability(epsilon: f64) -> f64 {
    if epsilon.is_infinite() {
        return 0.0;
    }
    let e = (-epsilon).exp();
    e / (1.0 + e)
}

/// Binary randomized response: returns the input bit with probability
/// `e^ε / (1 + e^ε)`, the flipped bit otherwise.
pub fn randomized_response(bit: f64, epsilon: f64, rng: &mut impl Rng) -> Result<f64> {
    if bit != 0.0 && bit != 1.0 {
        return Err(Error::NonBinarySupport(format!("input {bit}")));
    }
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "randomized response requires epsilon > 0, got {epsilon}"
        )));
    }
    let keep = rr_keep_probability(epsilon);
    if rng.random::<f64>() < keep {
        Ok(bit)
    } else {
        Ok(1.0 - bit)
    }
}

/// Pushforward of a Bernoulli reward distribution through randomized
/// response: `Bern(p)` becomes `Bern(p·e^ε/(1+e^ε) + (1−p)/(1+e^ε))`.
pub fn corrupt_distribution(f: &RewardDistribution, epsilon: f64) -> Result<RewardDistribution> {
    if !f.is_binary() {
        return Err(Error::NonBinarySupport(format!("{:?}", f.support())));
    }
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "randomized response requires epsilon > 0, got {epsilon}"
        )));
    }
    let p = f.mean();
    let keep = rr_keep_probability(epsilon);
    let flip = rr_flip_probability(epsilon);
    RewardDistribution::bernoulli(p * keep + (1.0 - p) * flip)
}

/// Unbiased inverse of the randomized-response mean map:
/// `(m·(e^ε + 1) − 1) / (e^ε − 1)`. The output may leave `[0, 1]`; callers
/// that need an index clamp it themselves.
pub fn rr_debias(observed_mean: f64, epsilon: f64) -> f64 {
    if epsilon.is_infinite() || epsilon > 700.0 {
        return observed_mean;
    }
    let e = epsilon.exp();
    (observed_mean * (e + 1.0) - 1.0) / (e - 1.0)
}

/// Laplace inverse CDF at quantile `u ∈ (0, 1)`, centered at zero.
pub fn laplace_inverse_cdf(u: f64, scale: f64) -> f64 {
    let c = u - 0.5;
    -scale * c.signum() * (1.0 - 2.0 * c.abs()).ln()
}

/// Adds Laplace noise with scale `sensitivity / ε` to `value`.
pub fn laplace_perturb(
    value: f64,
    sensitivity: f64,
    epsilon: f64,
    rng: &mut impl Rng,
) -> Result<f64> {
    if sensitivity.is_nan() || sensitivity <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "sensitivity must be positive, got {sensitivity}"
        )));
    }
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let scale = if epsilon.is_infinite() {
        0.0
    } else {
        sensitivity / epsilon
    };
    let mut u: f64 = rng.random();
    while u == 0.0 {
        u = rng.random();
    }
    Ok(value + laplace_inverse_cdf(u, scale))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn keep_probability_worked_values() {
        // e^ε = 3 gives keep probability 3/4.
        let k = rr_keep_probability(3.0f64.ln());
        assert!((k - 0.75).abs() < 1e-15, "keep {k}");
        assert_eq!(rr_keep_probability(f64::INFINITY), 1.0);
    }

    #[test]
    fn infinite_epsilon_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..100 {
            assert_eq!(
                randomized_response(1.0, f64::INFINITY, &mut rng).unwrap(),
                1.0
            );
            assert_eq!(
                randomized_response(0.0, f64::INFINITY, &mut rng).unwrap(),
                0.0
            );
        }
    }

    #[test]
    fn randomized_response_rejects_nonbinary_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(randomized_response(0.5, 1.0, &mut rng).is_err());
        assert!(randomized_response(1.0, 0.0, &mut rng).is_err());
    }

    #[test]
    fn channel_matrix_log_ratio_matches_epsilon() {
        // Exhaustive 2x2 audit at ε = ln 3: the extreme log-ratio is ln 3.
        let eps = 3.0f64.ln();
        let mech = Mechanism::randomized_response(eps).unwrap();
        let m = mech.channel_matrix(&[0.0, 1.0]).unwrap();
        let mut max_ratio: f64 = 0.0;
        for row in &m {
            for row_prime in &m {
                for (p, p_prime) in row.iter().zip(row_prime) {
                    max_ratio = max_ratio.max((p / p_prime).ln().abs());
                }
            }
        }
        assert!((max_ratio - eps).abs() < 1e-12, "max ratio {max_ratio}");
    }

    #[test]
    fn channel_rows_are_stochastic() {
        for mech in [
            Mechanism::randomized_response(0.3).unwrap(),
            Mechanism::identity(),
        ] {
            for row in mech.channel_matrix(&[0.0, 1.0]).unwrap() {
                let sum: f64 = row.iter().sum();
                assert!((sum - 1.0).abs() < 1e-15);
                assert!(row.iter().all(|&p| p >= 0.0));
            }
        }
        let lap = Mechanism::laplace(1.0, 1.0).unwrap();
        assert!(lap.channel_matrix(&[0.0, 1.0]).is_err());
    }

    #[test]
    fn corrupt_distribution_worked_values() {
        let eps = 3.0f64.ln();
        let g = |p: f64| {
            corrupt_distribution(&RewardDistribution::bernoulli(p).unwrap(), eps)
                .unwrap()
                .mean()
        };
        assert!((g(0.5) - 0.5).abs() < 1e-15);
        assert!((g(0.9) - 0.7).abs() < 1e-15);
        assert!((g(1.0) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn corrupt_distribution_requires_binary_support() {
        let f = RewardDistribution::new(vec![0.0, 0.5, 1.0], vec![0.2, 0.3, 0.5]).unwrap();
        assert!(corrupt_distribution(&f, 1.0).is_err());
    }

    #[test]
    fn debias_inverts_corruption() {
        let eps = 3.0f64.ln();
        assert!((rr_debias(0.7, eps) - 0.9).abs() < 1e-12);
        assert!((rr_debias(0.5, 2.0) - 0.5).abs() < 1e-12);
        for p in [0.0, 0.25, 1.0] {
            let corrupted = corrupt_distribution(&RewardDistribution::bernoulli(p).unwrap(), eps)
                .unwrap()
                .mean();
            assert!((rr_debias(corrupted, eps) - p).abs() < 1e-12, "p={p}");
        }
    }

    #[test]
    fn corrupted_kl_contraction_on_bernoulli_grid() {
        // Per-arm inequality behind the locally private decomposition:
        // KL(g‖g') ≤ 2·min{4, e^{2ε}}·(e^ε − 1)²·KL(f‖f') on a 0.05 grid.
        use crate::divergence::{kl, FiniteDistribution};
        for eps in [0.1, 0.5, 3.0f64.ln(), 2.0] {
            let factor = 2.0 * 4.0f64.min((2.0 * eps).exp()) * (eps.exp() - 1.0).powi(2);
            for i in 0..=20 {
                for j in 0..=20 {
                    let p = i as f64 * 0.05;
                    let q = j as f64 * 0.05;
                    let fp = RewardDistribution::bernoulli(p).unwrap();
                    let fq = RewardDistribution::bernoulli(q).unwrap();
                    let gp = corrupt_distribution(&fp, eps).unwrap();
                    let gq = corrupt_distribution(&fq, eps).unwrap();
                    let lhs = kl(
                        &FiniteDistribution::bernoulli(gp.mean()).unwrap(),
                        &FiniteDistribution::bernoulli(gq.mean()).unwrap(),
                    );
                    let rhs = factor
                        * kl(
                            &FiniteDistribution::bernoulli(p).unwrap(),
                            &FiniteDistribution::bernoulli(q).unwrap(),
                        );
                    assert!(lhs <= rhs + 1e-12, "eps={eps}, p={p}, q={q}: {lhs} > {rhs}");
                }
            }
        }
    }

    #[test]
    fn laplace_empirical_variance() {
        // Laplace variance is 2b²; b = 1 here.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 100_000;
        let draws: Vec<f64> = (0..n)
            .map(|_| laplace_perturb(0.0, 1.0, 1.0, &mut rng).unwrap())
            .collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
        assert!((var - 2.0).abs() < 0.1, "variance {var}");
        let band = 3.0 * 2.0f64.sqrt() / (n as f64).sqrt();
        assert!(mean.abs() < band, "mean {mean}");
    }

    #[test]
    fn laplace_median_is_preserved() {
        assert_eq!(laplace_inverse_cdf(0.5, 3.0), 0.0);
        assert_eq!(5.0 + laplace_inverse_cdf(0.5, 1.0), 5.0);
    }

    #[test]
    fn doubling_epsilon_halves_the_iqr() {
        let iqr = |eps: f64, seed: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut draws: Vec<f64> = (0..100_000)
                .map(|_| laplace_perturb(0.0, 1.0, eps, &mut rng).unwrap())
                .collect();
            draws.sort_by(|a, b| a.partial_cmp(b).unwrap());
            draws[75_000] - draws[25_000]
        };
        let ratio = iqr(2.0, 5) / iqr(1.0, 5);
        assert!((ratio - 0.5).abs() < 0.025, "ratio {ratio}");
    }

    #[test]
    fn laplace_rejects_bad_parameters() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(laplace_perturb(0.0, 0.0, 1.0, &mut rng).is_err());
        assert!(laplace_perturb(0.0, 1.0, -1.0, &mut rng).is_err());
        assert!(Mechanism::laplace(1.0, f64::INFINITY).is_err());
        assert!(Mechanism::randomized_response(0.0).is_err());
    }

    #[test]
    fn mechanism_json_round_trip() {
        let mech: Mechanism = serde_json::from_str(r#"{"kind":"rr","epsilon":1.0}"#).unwrap();
        assert_eq!(mech, Mechanism::RandomizedResponse { epsilon: 1.0 });
        let mech: Mechanism = serde_json::from_str(r#"{"kind":"laplace","epsilon":2.0}"#).unwrap();
        assert_eq!(
            mech,
            Mechanism::Laplace {
                epsilon: 2.0,
                sensitivity: 1.0
            }
        );
        assert!(serde_json::from_str::<Mechanism>(r#"{"kind":"rr","epsilon":-1.0}"#).is_err());
    }
}
