//! Closed-form minimax and problem-dependent regret lower bounds for private
//! bandits, the horizon thresholds attached to them, and the two-environment
//! hard-instance constructions their proofs rely on.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::decomposition::arm_kl;
use crate::env::Environment;
use crate::error::{Error, Result};

/// Advisory cap `a` in the instantaneous-DP precondition `ε ≤ a/2`.
pub const INSTANTANEOUS_ADVISORY_A: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Local,
    Instantaneous,
    Dp,
    BayesLocal,
    BayesInstantaneous,
    BayesDp,
    NonprivateMinimax,
    NonprivateProblemDep,
    LocalProblemDep,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Regime::Local => "local",
            Regime::Instantaneous => "instantaneous",
            Regime::Dp => "dp",
            Regime::BayesLocal => "bayes-local",
            Regime::BayesInstantaneous => "bayes-instantaneous",
            Regime::BayesDp => "bayes-dp",
            Regime::NonprivateMinimax => "nonprivate-minimax",
            Regime::NonprivateProblemDep => "nonprivate-problem-dep",
            Regime::LocalProblemDep => "local-problem-dep",
        };
        f.write_str(name)
    }
}

/// How the multiplicative constant in front of a rate is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstantMode {
    /// All multiplicative constants set to 1: the bare rate.
    RateOnly,
    /// The constant the proof actually yields.
    ProofConstant,
    Custom(f64),
}

impl ConstantMode {
    fn resolve(&self, proof_constant: f64) -> f64 {
        match self {
            ConstantMode::RateOnly => 1.0,
            ConstantMode::ProofConstant => proof_constant,
            ConstantMode::Custom(c) => *c,
        }
    }
}

impl fmt::Display for ConstantMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstantMode::RateOnly => f.write_str("rate-only"),
            ConstantMode::ProofConstant => f.write_str("proof-constant"),
            ConstantMode::Custom(c) => write!(f, "custom({c})"),
        }
    }
}

/// Which published form of the general-DP bound to evaluate. The appendix
/// derivation is the default: it is the only internally consistent chain.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DpVariant {
    #[default]
    AppendixDerivation,
    TheoremText,
}

impl fmt::Display for DpVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DpVariant::AppendixDerivation => f.write_str("appendix-derivation"),
            DpVariant::TheoremText => f.write_str("theorem-text"),
        }
    }
}

/// An evaluated regret lower bound with every constant pinned down.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundSpec {
    pub regime: Regime,
    pub num_arms: usize,
    pub horizon: u64,
    pub epsilon: f64,
    /// Lipschitz budget `c = L·Δ` (general-DP regime only; zero elsewhere).
    pub lipschitz_budget: f64,
    pub constant_mode: ConstantMode,
    pub variant: Option<DpVariant>,
    pub value: f64,
    /// True for Bayesian aliases, whose equality with the minimax bound
    /// assumes rewards bounded in `[0, 1]`.
    pub bounded_rewards_assumed: bool,
    pub warnings: Vec<String>,
}

impl BoundSpec {
    /// One CSV row in the schema `regime,K,T,epsilon,c,variant,value`.
    pub fn csv_row(&self) -> String {
        let variant = self.variant.map_or(String::new(), |v| v.to_string());
        format!(
            "{},{},{},{},{},{},{}",
            self.regime,
            self.num_arms,
            self.horizon,
            self.epsilon,
            self.lipschitz_budget,
            variant,
            self.value
        )
    }

    pub const CSV_HEADER: &'static str = "regime,K,T,epsilon,c,variant,value";
}

fn check_arms(num_arms: usize) -> Result<()> {
    if num_arms < 2 {
        return Err(Error::InvalidParameter(format!(
            "bounds need at least 2 arms, got {num_arms}"
        )));
    }
    Ok(())
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "privacy level must be positive, got {epsilon}"
        )));
    }
    Ok(())
}

/// `min{2, e^ε}·(e^ε − 1)`, the local-privacy degradation factor.
fn local_factor(epsilon: f64) -> f64 {
    2.0f64.min(epsilon.exp()) * (epsilon.exp() - 1.0)
}

/// `min{4, e^{2ε}}·(e^ε − 1)²`, the squared form used by thresholds and gaps.
fn local_factor_squared(epsilon: f64) -> f64 {
    4.0f64.min((2.0 * epsilon).exp()) * (epsilon.exp() - 1.0).powi(2)
}

/// Horizon threshold `g(K, ε) = (K−1) / (min{4, e^{2ε}}·(e^ε − 1)²)` below
/// which the local minimax construction is infeasible.
pub fn local_threshold(num_arms: usize, epsilon: f64) -> Result<f64> {
    check_arms(num_arms)?;
    check_epsilon(epsilon)?;
    Ok((num_arms as f64 - 1.0) / local_factor_squared(epsilon))
}

/// Horizon threshold `h(K, ε) = (K−1)·ln(ε²+1) / (ε·e^{2(ε+c)})` for the
/// general-DP construction.
pub fn dp_threshold(num_arms: usize, epsilon: f64, lipschitz_budget: f64) -> Result<f64> {
    check_arms(num_arms)?;
    check_epsilon(epsilon)?;
    Ok((num_arms as f64 - 1.0) * (epsilon * epsilon + 1.0).ln()
        / (epsilon * (2.0 * (epsilon + lipschitz_budget)).exp()))
}

/// Minimax lower bound for locally private bandits:
/// `c · sqrt((K−1)·T) / (min{2, e^ε}·(e^ε − 1))`,
/// with proof constant `c = 1/(4e⁴)`.
pub fn minimax_lb_local(
    num_arms: usize,
    horizon: u64,
    epsilon: f64,
    mode: ConstantMode,
) -> Result<BoundSpec> {
    check_arms(num_arms)?;
    check_epsilon(epsilon)?;
    let c = mode.resolve(1.0 / (4.0 * 4.0f64.exp()));
    let value = c * ((num_arms as f64 - 1.0) * horizon as f64).sqrt() / local_factor(epsilon);
    let mut warnings = Vec::new();
    let g = local_threshold(num_arms, epsilon)?;
    if (horizon as f64) < g {
        warnings.push(format!(
            "horizon {horizon} is below the threshold g(K, eps) = {g}"
        ));
    }
    Ok(BoundSpec {
        regime: Regime::Local,
        num_arms,
        horizon,
        epsilon,
        lipschitz_budget: 0.0,
        constant_mode: mode,
        variant: None,
        value,
        bounded_rewards_assumed: false,
        warnings,
    })
}

/// Minimax lower bound for instantaneously private bandits:
/// `c(a) · sqrt((K−1)·T / (2ε·(e^{2ε} − 1)))`.
///
/// The proof leaves `c(a)` pinned only up to an unevaluated Lambert-W
/// expression, so rate-only (constant 1) is the default and a custom
/// constant can be supplied instead.
pub fn minimax_lb_instantaneous(
    num_arms: usize,
    horizon: u64,
    epsilon: f64,
    mode: ConstantMode,
) -> Result<BoundSpec> {
    check_arms(num_arms)?;
    check_epsilon(epsilon)?;
    let c = mode.resolve(1.0);
    let value = c
        * ((num_arms as f64 - 1.0) * horizon as f64
            / (2.0 * epsilon * ((2.0 * epsilon).exp() - 1.0)))
            .sqrt();
    let mut warnings = Vec::new();
    if epsilon > INSTANTANEOUS_ADVISORY_A / 2.0 {
        warnings.push(format!(
            "epsilon {epsilon} exceeds the advisory precondition eps <= a/2 with a = {INSTANTANEOUS_ADVISORY_A}"
        ));
    }
    Ok(BoundSpec {
        regime: Regime::Instantaneous,
        num_arms,
        horizon,
        epsilon,
        lipschitz_budget: 0.0,
        constant_mode: mode,
        variant: None,
        value,
        bounded_rewards_assumed: false,
        warnings,
    })
}

/// Minimax lower bound for general-DP bandits.
///
/// * `AppendixDerivation` (default):
///   `(1/(8·e^{3(ε+c)})) · sqrt((K−1)·T·ln(ε²+1)/ε) · (ε²+1)^{−1/(2ε)}`
/// * `TheoremText`:
///   `(1/(8·e^{3(ε+c)})) · sqrt((K−1)·T·ln(ε+1) / (ε^{1+1/ε}·(ε²+1)^{1/ε}))`
pub fn minimax_lb_dp(
    num_arms: usize,
    horizon: u64,
    epsilon: f64,
    lipschitz_budget: f64,
    variant: DpVariant,
) -> Result<BoundSpec> {
    check_arms(num_arms)?;
    check_epsilon(epsilon)?;
    if lipschitz_budget.is_nan() || lipschitz_budget < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "Lipschitz budget must be nonnegative, got {lipschitz_budget}"
        )));
    }
    let k1t = (num_arms as f64 - 1.0) * horizon as f64;
    let prefactor = 1.0 / (8.0 * (3.0 * (epsilon + lipschitz_budget)).exp());
    let value = match variant {
        DpVariant::AppendixDerivation => {
            prefactor
                * (k1t * (epsilon * epsilon + 1.0).ln() / epsilon).sqrt()
                * (epsilon * epsilon + 1.0).powf(-1.0 / (2.0 * epsilon))
        }
        DpVariant::TheoremText => {
            prefactor
                * (k1t * (epsilon + 1.0).ln()
                    / (epsilon.powf(1.0 + 1.0 / epsilon)
                        * (epsilon * epsilon + 1.0).powf(1.0 / epsilon)))
                .sqrt()
        }
    };
    let mut warnings = Vec::new();
    let h = dp_threshold(num_arms, epsilon, lipschitz_budget)?;
    if (horizon as f64) < h {
        warnings.push(format!(
            "horizon {horizon} is below the threshold h(K, eps) = {h}"
        ));
    }
    Ok(BoundSpec {
        regime: Regime::Dp,
        num_arms,
        horizon,
        epsilon,
        lipschitz_budget,
        constant_mode: ConstantMode::ProofConstant,
        variant: Some(variant),
        value,
        bounded_rewards_assumed: false,
        warnings,
    })
}

/// Non-private minimax baseline `c · sqrt((K−1)·T)`.
pub fn minimax_lb_nonprivate(
    num_arms: usize,
    horizon: u64,
    mode: ConstantMode,
) -> Result<BoundSpec> {
    check_arms(num_arms)?;
    let c = mode.resolve(1.0 / (4.0 * 4.0f64.exp()));
    Ok(BoundSpec {
        regime: Regime::NonprivateMinimax,
        num_arms,
        horizon,
        epsilon: f64::INFINITY,
        lipschitz_budget: 0.0,
        constant_mode: mode,
        variant: None,
        value: c * ((num_arms as f64 - 1.0) * horizon as f64).sqrt(),
        bounded_rewards_assumed: false,
        warnings: Vec::new(),
    })
}

/// Per-`ln T` coefficient of the problem-dependent locally private bound:
/// `Σ_{a ≠ a*} Δ_a / (2·min{4, e^{2ε}}·(e^ε − 1)²·KL(f_a ‖ f*))`.
///
/// Arms with infinite `KL(f_a ‖ f*)` contribute nothing and are reported as
/// warnings.
pub fn problem_dependent_lb_local(env: &Environment, epsilon: f64) -> Result<BoundSpec> {
    check_epsilon(epsilon)?;
    let best = unique_optimal_arm(env)?;
    let factor = 2.0 * local_factor_squared(epsilon);
    let mut warnings = Vec::new();
    let value = suboptimal_terms(env, best, &mut warnings)?
        .into_iter()
        .map(|(gap, divergence)| gap / (factor * divergence))
        .sum();
    Ok(BoundSpec {
        regime: Regime::LocalProblemDep,
        num_arms: env.num_arms(),
        horizon: 0,
        epsilon,
        lipschitz_budget: 0.0,
        constant_mode: ConstantMode::ProofConstant,
        variant: None,
        value,
        bounded_rewards_assumed: false,
        warnings,
    })
}

/// Non-private problem-dependent baseline coefficient `Σ_{a ≠ a*} Δ_a / KL(f_a ‖ f*)`.
pub fn problem_dependent_lb_nonprivate(env: &Environment) -> Result<BoundSpec> {
    let best = unique_optimal_arm(env)?;
    let mut warnings = Vec::new();
    let value = suboptimal_terms(env, best, &mut warnings)?
        .into_iter()
        .map(|(gap, divergence)| gap / divergence)
        .sum();
    Ok(BoundSpec {
        regime: Regime::NonprivateProblemDep,
        num_arms: env.num_arms(),
        horizon: 0,
        epsilon: f64::INFINITY,
        lipschitz_budget: 0.0,
        constant_mode: ConstantMode::ProofConstant,
        variant: None,
        value,
        bounded_rewards_assumed: false,
        warnings,
    })
}

fn unique_optimal_arm(env: &Environment) -> Result<usize> {
    let means = env.means();
    let best = env.optimal_mean();
    let optima = means.iter().filter(|&&m| m == best).count();
    if optima != 1 {
        return Err(Error::DegenerateInstance(format!(
            "{optima} arms share the optimal mean {best}"
        )));
    }
    Ok(env.optimal_arm())
}

fn suboptimal_terms(
    env: &Environment,
    best: usize,
    warnings: &mut Vec<String>,
) -> Result<Vec<(f64, f64)>> {
    let f_star = env.arm(best)?;
    let mut terms = Vec::new();
    for (a, gap) in env.gaps().into_iter().enumerate() {
        if a == best {
            continue;
        }
        let divergence = arm_kl(env.arm(a)?, f_star);
        if divergence.is_infinite() {
            warnings.push(format!(
                "arm {a} has infinite divergence to the optimum; term dropped"
            ));
            continue;
        }
        terms.push((gap, divergence));
    }
    Ok(terms)
}

/// Bayesian minimax aliases. The values equal their minimax counterparts for
/// finitely supported rewards in `[0, 1]`; only the regime tag and the
/// bounded-reward flag differ.
pub fn bayes_minimax_lb_local(
    num_arms: usize,
    horizon: u64,
    epsilon: f64,
    mode: ConstantMode,
) -> Result<BoundSpec> {
    let mut spec = minimax_lb_local(num_arms, horizon, epsilon, mode)?;
    spec.regime = Regime::BayesLocal;
    spec.bounded_rewards_assumed = true;
    Ok(spec)
}

pub fn bayes_minimax_lb_instantaneous(
    num_arms: usize,
    horizon: u64,
    epsilon: f64,
    mode: ConstantMode,
) -> Result<BoundSpec> {
    let mut spec = minimax_lb_instantaneous(num_arms, horizon, epsilon, mode)?;
    spec.regime = Regime::BayesInstantaneous;
    spec.bounded_rewards_assumed = true;
    Ok(spec)
}

pub fn bayes_minimax_lb_dp(
    num_arms: usize,
    horizon: u64,
    epsilon: f64,
    lipschitz_budget: f64,
    variant: DpVariant,
) -> Result<BoundSpec> {
    let mut spec = minimax_lb_dp(num_arms, horizon, epsilon, lipschitz_budget, variant)?;
    spec.regime = Regime::BayesDp;
    spec.bounded_rewards_assumed = true;
    Ok(spec)
}

/// The regimes for which a hard-instance construction exists.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HardInstanceRegime {
    Local,
    Dp,
}

/// Two Bernoulli environments that differ in exactly one arm, shifted into
/// `[0, 1]`: means `{0.5+Δ, 0.5, …, 0.5}` versus `{0.5+Δ, 0.5, …, 0.5+2Δ}`.
/// Arm 0 is optimal in the first, arm `K−1` in the second.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HardInstancePair {
    pub env1: Environment,
    pub env2: Environment,
    pub gap: f64,
    pub target_arm: usize,
    pub regime: HardInstanceRegime,
}

/// Builds the proof's hard-instance pair for the given regime, with the gap
///
/// * local: `Δ = sqrt((K−1) / (min{4, e^{2ε}}·(e^ε − 1)²·T))`
/// * dp:    `Δ = sqrt((K−1)·ln(ε²+1) / (4·T·ε·e^{2(ε+c)}))`
pub fn hard_instance_pair(
    num_arms: usize,
    horizon: u64,
    epsilon: f64,
    regime: HardInstanceRegime,
    lipschitz_budget: f64,
) -> Result<HardInstancePair> {
    check_arms(num_arms)?;
    check_epsilon(epsilon)?;
    if horizon == 0 {
        return Err(Error::InvalidParameter("horizon must be at least 1".into()));
    }
    let k1 = num_arms as f64 - 1.0;
    let t = horizon as f64;
    let gap = match regime {
        HardInstanceRegime::Local => (k1 / (local_factor_squared(epsilon) * t)).sqrt(),
        HardInstanceRegime::Dp => (k1 * (epsilon * epsilon + 1.0).ln()
            / (4.0 * t * epsilon * (2.0 * (epsilon + lipschitz_budget)).exp()))
        .sqrt(),
    };
    if gap > 0.5 {
        return Err(Error::InfeasibleHorizon {
            delta: gap,
            limit: 0.5,
        });
    }
    // Means shift by +0.5 to land in [0, 1]; arm K−1 rises by 2Δ in env2.
    if 0.5 + 2.0 * gap > 1.0 {
        return Err(Error::InfeasibleHorizon {
            delta: gap,
            limit: 0.25,
        });
    }
    let mut means1 = vec![0.5; num_arms];
    means1[0] = 0.5 + gap;
    let mut means2 = means1.clone();
    means2[num_arms - 1] = 0.5 + 2.0 * gap;
    Ok(HardInstancePair {
        env1: Environment::bernoulli(&means1)?,
        env2: Environment::bernoulli(&means2)?,
        gap,
        target_arm: num_arms - 1,
        regime,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn relative_close(got: f64, want: f64, tol: f64) -> bool {
        (got - want).abs() <= tol * want.abs()
    }

    #[test]
    fn local_rate_only_worked_value() {
        let spec = minimax_lb_local(2, 10_000, 1.0, ConstantMode::RateOnly).unwrap();
        assert!(relative_close(spec.value, 29.0988, 1e-4), "{}", spec.value);
        assert!(spec.warnings.is_empty());
    }

    #[test]
    fn local_proof_constant_worked_value() {
        let spec = minimax_lb_local(2, 10_000, 1.0, ConstantMode::ProofConstant).unwrap();
        assert!(relative_close(spec.value, 0.13324, 1e-4), "{}", spec.value);
    }

    #[test]
    fn local_vanishes_monotonically_without_privacy() {
        let value = |eps| {
            minimax_lb_local(2, 10_000, eps, ConstantMode::RateOnly)
                .unwrap()
                .value
        };
        assert!(value(1.0) > value(10.0));
        assert!(value(10.0) > value(100.0));
        assert_eq!(value(f64::INFINITY), 0.0);
    }

    #[test]
    fn instantaneous_rate_only_worked_value() {
        let spec = minimax_lb_instantaneous(2, 10_000, 1.0, ConstantMode::RateOnly).unwrap();
        assert!(relative_close(spec.value, 27.975, 1e-4), "{}", spec.value);
        // ε = 1 exceeds a/2 = 1? No: the advisory triggers strictly above.
        assert!(spec.warnings.is_empty());
        let flagged = minimax_lb_instantaneous(2, 10_000, 1.5, ConstantMode::RateOnly).unwrap();
        assert_eq!(flagged.warnings.len(), 1);
    }

    #[test]
    fn instantaneous_zero_horizon_is_zero() {
        let spec = minimax_lb_instantaneous(2, 0, 1.0, ConstantMode::RateOnly).unwrap();
        assert_eq!(spec.value, 0.0);
    }

    #[test]
    fn instantaneous_rate_sits_below_local_rate() {
        // Instantaneous privacy is the milder constraint, so its lower bound
        // stays below the local one; the ratio follows the two privacy
        // factors exactly.
        for eps in [0.1, 0.5, 1.0, 1.5, 2.0] {
            let local = minimax_lb_local(2, 10_000, eps, ConstantMode::RateOnly)
                .unwrap()
                .value;
            let inst = minimax_lb_instantaneous(2, 10_000, eps, ConstantMode::RateOnly)
                .unwrap()
                .value;
            let ratio = local / inst;
            let expected = (2.0 * eps * ((2.0 * eps).exp() - 1.0)).sqrt()
                / (2.0f64.min(eps.exp()) * (eps.exp() - 1.0));
            assert!(relative_close(ratio, expected, 1e-12), "eps={eps}");
            assert!(inst < local, "eps={eps}: {inst} vs {local}");
        }
    }

    #[test]
    fn dp_appendix_worked_value() {
        let spec = minimax_lb_dp(2, 10_000, 1.0, 0.0, DpVariant::AppendixDerivation).unwrap();
        assert!(relative_close(spec.value, 0.36638, 1e-4), "{}", spec.value);
    }

    #[test]
    fn dp_variants_coincide_only_at_eps_one() {
        let appendix = |eps| {
            minimax_lb_dp(2, 10_000, eps, 0.0, DpVariant::AppendixDerivation)
                .unwrap()
                .value
        };
        let text = |eps| {
            minimax_lb_dp(2, 10_000, eps, 0.0, DpVariant::TheoremText)
                .unwrap()
                .value
        };
        assert!((appendix(1.0) - text(1.0)).abs() < 1e-12);
        assert!((appendix(2.0) - text(2.0)).abs() > 1e-3);
    }

    #[test]
    fn dp_theorem_text_blows_up_at_small_epsilon() {
        let value = |eps| {
            minimax_lb_dp(2, 10_000, eps, 0.0, DpVariant::TheoremText)
                .unwrap()
                .value
        };
        assert!(value(0.01) > value(0.1));
        assert!(value(0.001) > value(0.01));
        assert!(value(0.001) > 1e6);
    }

    #[test]
    fn dp_lipschitz_budget_scales_by_exp_minus_three() {
        let v0 = minimax_lb_dp(2, 10_000, 1.0, 0.0, DpVariant::AppendixDerivation)
            .unwrap()
            .value;
        let v1 = minimax_lb_dp(2, 10_000, 1.0, 1.0, DpVariant::AppendixDerivation)
            .unwrap()
            .value;
        assert!(relative_close(v1 / v0, (-3.0f64).exp(), 1e-12));
    }

    #[test]
    fn problem_dependent_worked_values() {
        let env = Environment::bernoulli(&[0.75, 0.5]).unwrap();
        let private = problem_dependent_lb_local(&env, 1.0).unwrap();
        assert!(
            relative_close(private.value, 0.073582, 1e-4),
            "{}",
            private.value
        );
        let baseline = problem_dependent_lb_nonprivate(&env).unwrap();
        assert!(
            relative_close(baseline.value, 1.73804, 1e-4),
            "{}",
            baseline.value
        );
    }

    #[test]
    fn problem_dependent_coefficient_vanishes_as_privacy_relaxes() {
        let env = Environment::bernoulli(&[0.75, 0.5]).unwrap();
        let tight = problem_dependent_lb_local(&env, 0.5).unwrap().value;
        let loose = problem_dependent_lb_local(&env, 5.0).unwrap().value;
        assert!(tight > loose);
        assert!(problem_dependent_lb_local(&env, 1e6).unwrap().value < 1e-9);
    }

    #[test]
    fn problem_dependent_rejects_non_unique_optimum() {
        let env = Environment::bernoulli(&[0.75, 0.75]).unwrap();
        assert!(matches!(
            problem_dependent_lb_local(&env, 1.0),
            Err(Error::DegenerateInstance(_))
        ));
    }

    #[test]
    fn problem_dependent_drops_infinite_divergence_terms() {
        // KL(Bern(0.5) ‖ Bern(1.0)) is infinite, so the only suboptimal term
        // is dropped, leaving the empty sum.
        let env = Environment::bernoulli(&[1.0, 0.5]).unwrap();
        let spec = problem_dependent_lb_local(&env, 1.0).unwrap();
        assert_eq!(spec.value, 0.0);
        assert_eq!(spec.warnings.len(), 1);
    }

    #[test]
    fn threshold_worked_values() {
        let g = local_threshold(2, 1.0).unwrap();
        assert!(relative_close(g, 0.084674, 1e-4), "{g}");
        // Linear in K−1.
        let g5 = local_threshold(5, 1.0).unwrap();
        assert!(relative_close(g5, 4.0 * g, 1e-12));

        let h = dp_threshold(2, 1.0, 0.0).unwrap();
        assert!(relative_close(h, 0.093807, 1e-4), "{h}");
    }

    #[test]
    fn hard_instance_worked_gap() {
        let pair = hard_instance_pair(2, 100, 1.0, HardInstanceRegime::Local, 0.0).unwrap();
        assert!(relative_close(pair.gap, 0.029099, 1e-4), "{}", pair.gap);
    }

    #[test]
    fn hard_instance_structure_across_the_grid() {
        for regime in [HardInstanceRegime::Local, HardInstanceRegime::Dp] {
            for k in [2usize, 3, 4] {
                for eps in [0.5, 1.0, 2.0] {
                    for t in [1_000u64, 10_000] {
                        let pair = hard_instance_pair(k, t, eps, regime, 0.0).unwrap();
                        assert_eq!(pair.env1.optimal_arm(), 0);
                        assert_eq!(pair.env2.optimal_arm(), k - 1);
                        assert_eq!(pair.target_arm, k - 1);
                        // The two environments differ in arm K−1 only.
                        for a in 0..k - 1 {
                            assert_eq!(pair.env1.arm(a).unwrap(), pair.env2.arm(a).unwrap());
                        }
                        assert_ne!(pair.env1.arm(k - 1).unwrap(), pair.env2.arm(k - 1).unwrap());
                        assert!(pair.gap <= 0.25);
                    }
                }
            }
        }
    }

    #[test]
    fn hard_instance_rejects_infeasible_horizons() {
        assert!(matches!(
            hard_instance_pair(2, 1, 0.1, HardInstanceRegime::Local, 0.0),
            Err(Error::InfeasibleHorizon { .. })
        ));
    }

    #[test]
    fn bound_value_scales_as_sqrt_horizon() {
        let t = 12_345u64;
        let cases: Vec<(f64, f64)> = vec![
            (
                minimax_lb_local(3, t, 0.7, ConstantMode::RateOnly)
                    .unwrap()
                    .value,
                minimax_lb_local(3, 4 * t, 0.7, ConstantMode::RateOnly)
                    .unwrap()
                    .value,
            ),
            (
                minimax_lb_instantaneous(3, t, 0.7, ConstantMode::RateOnly)
                    .unwrap()
                    .value,
                minimax_lb_instantaneous(3, 4 * t, 0.7, ConstantMode::RateOnly)
                    .unwrap()
                    .value,
            ),
            (
                minimax_lb_dp(3, t, 0.7, 0.0, DpVariant::AppendixDerivation)
                    .unwrap()
                    .value,
                minimax_lb_dp(3, 4 * t, 0.7, 0.0, DpVariant::AppendixDerivation)
                    .unwrap()
                    .value,
            ),
        ];
        for (v1, v4) in cases {
            assert!(relative_close(v4 / v1, 2.0, 1e-9), "{v4} / {v1}");
        }
    }

    #[test]
    fn bayesian_aliases_match_minimax_values() {
        for eps in [0.5, 1.0] {
            let mm = minimax_lb_local(2, 10_000, eps, ConstantMode::RateOnly).unwrap();
            let bayes = bayes_minimax_lb_local(2, 10_000, eps, ConstantMode::RateOnly).unwrap();
            assert_eq!(mm.value, bayes.value);
            assert_eq!(bayes.regime, Regime::BayesLocal);
            assert!(bayes.bounded_rewards_assumed);

            let mm = minimax_lb_instantaneous(2, 10_000, eps, ConstantMode::RateOnly).unwrap();
            let bayes =
                bayes_minimax_lb_instantaneous(2, 10_000, eps, ConstantMode::RateOnly).unwrap();
            assert_eq!(mm.value, bayes.value);

            let mm = minimax_lb_dp(2, 10_000, eps, 0.0, DpVariant::AppendixDerivation).unwrap();
            let bayes =
                bayes_minimax_lb_dp(2, 10_000, eps, 0.0, DpVariant::AppendixDerivation).unwrap();
            assert_eq!(mm.value, bayes.value);
        }
    }

    #[test]
    fn csv_row_schema() {
        let spec = minimax_lb_dp(2, 10_000, 1.0, 0.0, DpVariant::AppendixDerivation).unwrap();
        let row = spec.csv_row();
        assert!(row.starts_with("dp,2,10000,1,0,appendix-derivation,"));
        let local = minimax_lb_local(2, 10, 1.0, ConstantMode::RateOnly).unwrap();
        assert!(local.csv_row().starts_with("local,2,10,1,0,,"));
    }

    #[test]
    fn bounds_reject_bad_parameters() {
        assert!(minimax_lb_local(1, 10, 1.0, ConstantMode::RateOnly).is_err());
        assert!(minimax_lb_local(2, 10, 0.0, ConstantMode::RateOnly).is_err());
        assert!(minimax_lb_dp(2, 10, 1.0, -1.0, DpVariant::AppendixDerivation).is_err());
    }
}
