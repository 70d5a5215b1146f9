//! Grid sweep drivers: exhaustive verification of the decomposition
//! relations over Bernoulli parameter grids, randomized inequality sweeps,
//! audit-exactness checks, and bound monotonicity scans.
//!
//! The decomposition grids are hot loops over hundreds of thousands of
//! environment pairs, so they run on cached history tables: per-history
//! policy products and pull counts are computed once per `(K, T, β)` and
//! reward products once per environment tuple. A seeded subsample of cells
//! is always re-verified against the reference verifiers in
//! [`crate::decomposition`] so the fast path cannot drift from them.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::audit::{audit_local_mechanism, verify_composition, verify_equivalence};
use crate::bounds::{
    minimax_lb_dp, minimax_lb_instantaneous, minimax_lb_local, problem_dependent_lb_local,
    ConstantMode, DpVariant,
};
use crate::decomposition::{
    verify_kl_decomposition, verify_local_private_decomposition,
    verify_neighbour_ratio_decomposition, Verdict,
};
use crate::divergence::{
    bretagnolle_huber, bretagnolle_huber_strict, kl, kl_bernoulli, tv_l1, FiniteDistribution,
};
use crate::env::{enumerate_histories, Environment};
use crate::error::{Error, Result};
use crate::mechanism::{rr_keep_probability, Mechanism};
use crate::policy::{ldp_pipeline, Policy};

/// Aggregate result of one sweep.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepOutcome {
    pub name: String,
    pub cells: usize,
    pub failures: usize,
    /// Largest |rhs − lhs| over equality cells (0 when not applicable).
    pub max_abs_slack: f64,
    /// Smallest finite rhs − lhs over inequality cells (+∞ when not
    /// applicable). For the locally private sweep this is taken over cells
    /// with distinct environments, where the slack must be strictly positive.
    pub min_slack: f64,
    pub worst_cell: Option<String>,
    pub notes: Option<String>,
}

impl SweepOutcome {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    pub fn summary_line(&self) -> String {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        let mut line = format!(
            "{verdict} {} cells={} failures={}",
            self.name, self.cells, self.failures
        );
        if self.max_abs_slack > 0.0 {
            line.push_str(&format!(" max|slack|={:.3e}", self.max_abs_slack));
        }
        if self.min_slack.is_finite() {
            line.push_str(&format!(" min_slack={:.3e}", self.min_slack));
        }
        if let Some(worst) = &self.worst_cell {
            line.push_str(&format!(" worst={worst}"));
        }
        if let Some(notes) = &self.notes {
            line.push_str(&format!(" ({notes})"));
        }
        line
    }
}

/// Cached enumeration of all binary-reward histories for one `(K, T)`.
struct HistoryTable {
    num_arms: usize,
    actions: Vec<Vec<u8>>,
    reward_bits: Vec<Vec<u8>>,
    pull_counts: Vec<Vec<u32>>,
}

impl HistoryTable {
    fn build(num_arms: usize, horizon: usize, cap: u128) -> Result<Self> {
        let mut actions = Vec::new();
        let mut reward_bits = Vec::new();
        let mut pull_counts = Vec::new();
        for h in enumerate_histories(num_arms, &[0.0, 1.0], horizon, cap)? {
            let mut acts = Vec::with_capacity(horizon);
            let mut bits = Vec::with_capacity(horizon);
            let mut counts = vec![0u32; num_arms];
            for step in h.steps() {
                acts.push(step.action as u8);
                bits.push(step.reward as u8);
                counts[step.action] += 1;
            }
            actions.push(acts);
            reward_bits.push(bits);
            pull_counts.push(counts);
        }
        Ok(Self {
            num_arms,
            actions,
            reward_bits,
            pull_counts,
        })
    }

    fn len(&self) -> usize {
        self.actions.len()
    }

    /// `∏_t π(a_t | prefix)` for every history; the policy part of the
    /// canonical product measure, shared by every environment pair.
    fn policy_products(&self, policy: &Policy) -> Result<Vec<f64>> {
        let mut products = Vec::with_capacity(self.len());
        for h in 0..self.len() {
            let mut prefix = crate::env::History::new();
            let mut product = 1.0;
            for (&a, &bit) in self.actions[h].iter().zip(&self.reward_bits[h]) {
                let dist = policy.action_distribution(self.num_arms, &prefix)?;
                product *= dist[a as usize];
                prefix.push(a as usize, bit as f64);
            }
            products.push(product);
        }
        Ok(products)
    }

    /// `∏_t f_{a_t}(x_t)` for every history under Bernoulli arms with the
    /// given means.
    fn reward_products(&self, means: &[f64]) -> Vec<f64> {
        (0..self.len())
            .map(|h| {
                self.actions[h]
                    .iter()
                    .zip(&self.reward_bits[h])
                    .map(|(&a, &bit)| {
                        let p = means[a as usize];
                        if bit == 1 {
                            p
                        } else {
                            1.0 - p
                        }
                    })
                    .product()
            })
            .collect()
    }
}

/// All mean tuples of length `num_arms` over the grid `{0, step, …, 1}`.
fn mean_tuples(num_arms: usize, grid_step: f64) -> Vec<Vec<f64>> {
    let n = (1.0 / grid_step).round() as usize + 1;
    let values: Vec<f64> = (0..n).map(|i| (i as f64 * grid_step).min(1.0)).collect();
    let total = n.pow(num_arms as u32);
    (0..total)
        .map(|mut code| {
            let mut tuple = vec![0.0; num_arms];
            for slot in (0..num_arms).rev() {
                tuple[slot] = values[code % n];
                code /= n;
            }
            tuple
        })
        .collect()
}

/// Both sides of the exact decomposition for one environment pair, computed
/// from cached tables.
fn decomposition_cell(
    table: &HistoryTable,
    pi: &[f64],
    rew1: &[f64],
    rew2: &[f64],
    means1: &[f64],
    means2: &[f64],
) -> (f64, f64) {
    let mut lhs = 0.0;
    let mut lhs_infinite = false;
    for h in 0..table.len() {
        let p1 = pi[h] * rew1[h];
        if p1 == 0.0 {
            continue;
        }
        if rew2[h] == 0.0 {
            lhs_infinite = true;
            break;
        }
        lhs += p1 * (rew1[h] / rew2[h]).ln();
    }
    let lhs = if lhs_infinite {
        f64::INFINITY
    } else {
        lhs.max(0.0)
    };

    let mut rhs = 0.0;
    for a in 0..table.num_arms {
        let mut expected_pulls = 0.0;
        for h in 0..table.len() {
            expected_pulls += pi[h] * rew1[h] * table.pull_counts[h][a] as f64;
        }
        if expected_pulls == 0.0 {
            continue;
        }
        rhs += expected_pulls * kl_bernoulli(means1[a], means2[a]);
    }
    (lhs, rhs)
}

struct CellStats {
    cells: usize,
    failures: usize,
    max_abs_slack: f64,
    min_slack: f64,
    worst: Option<(f64, String)>,
}

impl CellStats {
    fn empty() -> Self {
        Self {
            cells: 0,
            failures: 0,
            max_abs_slack: 0.0,
            min_slack: f64::INFINITY,
            worst: None,
        }
    }

    fn merge(mut self, other: Self) -> Self {
        self.cells += other.cells;
        self.failures += other.failures;
        self.max_abs_slack = self.max_abs_slack.max(other.max_abs_slack);
        self.min_slack = self.min_slack.min(other.min_slack);
        self.worst = match (self.worst.take(), other.worst) {
            (None, w) | (w, None) => w,
            (Some(a), Some(b)) => Some(if b.0 > a.0 { b } else { a }),
        };
        self
    }
}

/// Exhaustive equality sweep of the KL decomposition over Bernoulli grids:
/// every pair of grid environments, for each arm count, horizon, and softmax
/// sharpness. Passes only if `|rhs − lhs| ≤ tolerance` on every cell.
pub fn kl_decomposition_sweep(
    arm_counts: &[usize],
    horizons: &[usize],
    betas: &[f64],
    grid_step: f64,
    cap: u128,
    tolerance: f64,
) -> Result<SweepOutcome> {
    let mut stats = CellStats::empty();
    let mut rng = ChaCha8Rng::seed_from_u64(0x05ee_d1e3);
    for &k in arm_counts {
        let tuples = mean_tuples(k, grid_step);
        for &t in horizons {
            let table = HistoryTable::build(k, t, cap)?;
            let rewards: Vec<Vec<f64>> = tuples.iter().map(|m| table.reward_products(m)).collect();
            for &beta in betas {
                let policy = Policy::softmax(beta)?;
                let pi = table.policy_products(&policy)?;
                let n = tuples.len();
                let block = (0..n * n)
                    .into_par_iter()
                    .map(|pair| {
                        let (i, j) = (pair / n, pair % n);
                        let (lhs, rhs) = decomposition_cell(
                            &table,
                            &pi,
                            &rewards[i],
                            &rewards[j],
                            &tuples[i],
                            &tuples[j],
                        );
                        let mut cell = CellStats::empty();
                        cell.cells = 1;
                        if lhs.is_infinite() || rhs.is_infinite() {
                            if lhs != rhs {
                                cell.failures = 1;
                                cell.worst = Some((
                                    f64::INFINITY,
                                    format!("K={k} T={t} beta={beta} pair=({i},{j})"),
                                ));
                            }
                        } else {
                            let abs_slack = (rhs - lhs).abs();
                            cell.max_abs_slack = abs_slack;
                            if abs_slack > tolerance {
                                cell.failures = 1;
                            }
                            if abs_slack > 0.0 {
                                cell.worst = Some((
                                    abs_slack,
                                    format!("K={k} T={t} beta={beta} pair=({i},{j})"),
                                ));
                            }
                        }
                        cell
                    })
                    .reduce(CellStats::empty, CellStats::merge);
                stats = stats.merge(block);

                // Seeded spot-check of the fast tables against the
                // reference verifier.
                for _ in 0..3 {
                    let i = rng.random_range(0..tuples.len());
                    let j = rng.random_range(0..tuples.len());
                    cross_check_equality_cell(
                        &table, &pi, &tuples, &rewards, i, j, &policy, t, cap,
                    )?;
                }
            }
        }
    }
    Ok(SweepOutcome {
        name: "kl-decomposition-equality".into(),
        cells: stats.cells,
        failures: stats.failures,
        max_abs_slack: stats.max_abs_slack,
        min_slack: f64::INFINITY,
        worst_cell: stats.worst.map(|(_, w)| w),
        notes: None,
    })
}

#[allow(clippy::too_many_arguments)]
fn cross_check_equality_cell(
    table: &HistoryTable,
    pi: &[f64],
    tuples: &[Vec<f64>],
    rewards: &[Vec<f64>],
    i: usize,
    j: usize,
    policy: &Policy,
    horizon: usize,
    cap: u128,
) -> Result<()> {
    let env1 = Environment::bernoulli(&tuples[i])?;
    let env2 = Environment::bernoulli(&tuples[j])?;
    let report = verify_kl_decomposition(policy, &env1, &env2, horizon, cap, 1e-9)?;
    let (lhs, rhs) =
        decomposition_cell(table, pi, &rewards[i], &rewards[j], &tuples[i], &tuples[j]);
    let close = |a: f64, b: f64| {
        (a.is_infinite() && b.is_infinite()) || (a - b).abs() <= 1e-11 * (1.0 + a.abs())
    };
    if !close(lhs, report.lhs) || !close(rhs, report.rhs) {
        return Err(Error::InvalidParameter(format!(
            "fast sweep diverged from the reference verifier on pair ({i},{j}): \
             ({lhs}, {rhs}) vs ({}, {})",
            report.lhs, report.rhs
        )));
    }
    Ok(())
}

/// Exhaustive inequality sweep of the locally private decomposition bound:
/// the privatized history KL against the contracted per-arm sum, over the
/// same grids as [`kl_decomposition_sweep`] times a randomized-response
/// privacy grid.
pub fn local_private_sweep(
    arm_counts: &[usize],
    horizons: &[usize],
    betas: &[f64],
    epsilons: &[f64],
    grid_step: f64,
    cap: u128,
    tolerance: f64,
) -> Result<SweepOutcome> {
    let mut stats = CellStats::empty();
    let mut rng = ChaCha8Rng::seed_from_u64(0x05ee_d1e4);
    for &k in arm_counts {
        let tuples = mean_tuples(k, grid_step);
        for &t in horizons {
            let table = HistoryTable::build(k, t, cap)?;
            for &eps in epsilons {
                let keep = rr_keep_probability(eps);
                let corrupted: Vec<Vec<f64>> = tuples
                    .iter()
                    .map(|m| {
                        m.iter()
                            .map(|p| p * keep + (1.0 - p) * (1.0 - keep))
                            .collect()
                    })
                    .collect();
                let rewards: Vec<Vec<f64>> =
                    corrupted.iter().map(|g| table.reward_products(g)).collect();
                let factor = 2.0 * 4.0f64.min((2.0 * eps).exp()) * (eps.exp() - 1.0).powi(2);
                for &beta in betas {
                    let policy = Policy::softmax(beta)?;
                    let pi = table.policy_products(&policy)?;
                    let n = tuples.len();
                    let block = (0..n * n)
                        .into_par_iter()
                        .map(|pair| {
                            let (i, j) = (pair / n, pair % n);
                            let (lhs, rhs) = local_private_cell(
                                &table,
                                &pi,
                                &rewards[i],
                                &rewards[j],
                                &tuples[i],
                                &tuples[j],
                                factor,
                            );
                            let mut cell = CellStats::empty();
                            cell.cells = 1;
                            if rhs.is_finite() {
                                let slack = rhs - lhs;
                                if slack < -tolerance {
                                    cell.failures = 1;
                                    cell.worst = Some((
                                        -slack,
                                        format!("K={k} T={t} eps={eps} beta={beta} pair=({i},{j})"),
                                    ));
                                }
                                if i != j {
                                    cell.min_slack = slack;
                                }
                            } else if lhs.is_infinite() {
                                cell.failures = 1;
                            }
                            cell
                        })
                        .reduce(CellStats::empty, CellStats::merge);
                    stats = stats.merge(block);

                    for _ in 0..2 {
                        let i = rng.random_range(0..tuples.len());
                        let j = rng.random_range(0..tuples.len());
                        cross_check_private_cell(
                            &table, &pi, &tuples, &rewards, i, j, &policy, eps, t, factor, cap,
                        )?;
                    }
                }
            }
        }
    }
    Ok(SweepOutcome {
        name: "local-private-kl-bound".into(),
        cells: stats.cells,
        failures: stats.failures,
        max_abs_slack: 0.0,
        min_slack: stats.min_slack,
        worst_cell: stats.worst.map(|(_, w)| w),
        notes: None,
    })
}

fn local_private_cell(
    table: &HistoryTable,
    pi: &[f64],
    rew1: &[f64],
    rew2: &[f64],
    original1: &[f64],
    original2: &[f64],
    factor: f64,
) -> (f64, f64) {
    let mut lhs = 0.0;
    for h in 0..table.len() {
        let p1 = pi[h] * rew1[h];
        if p1 == 0.0 {
            continue;
        }
        lhs += p1 * (rew1[h] / rew2[h]).ln();
    }
    let lhs = lhs.max(0.0);

    let mut sum = 0.0;
    for a in 0..table.num_arms {
        let mut expected_pulls = 0.0;
        for h in 0..table.len() {
            expected_pulls += pi[h] * rew1[h] * table.pull_counts[h][a] as f64;
        }
        if expected_pulls == 0.0 {
            continue;
        }
        sum += expected_pulls * kl_bernoulli(original1[a], original2[a]);
    }
    let rhs = if sum == 0.0 { 0.0 } else { factor * sum };
    (lhs, rhs)
}

#[allow(clippy::too_many_arguments)]
fn cross_check_private_cell(
    table: &HistoryTable,
    pi: &[f64],
    tuples: &[Vec<f64>],
    rewards: &[Vec<f64>],
    i: usize,
    j: usize,
    policy: &Policy,
    epsilon: f64,
    horizon: usize,
    factor: f64,
    cap: u128,
) -> Result<()> {
    let mech = Mechanism::randomized_response(epsilon)?;
    let env1 = Environment::bernoulli(&tuples[i])?;
    let env2 = Environment::bernoulli(&tuples[j])?;
    let report =
        verify_local_private_decomposition(&mech, policy, &env1, &env2, horizon, cap, 1e-9)?;
    let (lhs, rhs) = local_private_cell(
        table,
        pi,
        &rewards[i],
        &rewards[j],
        &tuples[i],
        &tuples[j],
        factor,
    );
    let close = |a: f64, b: f64| {
        (a.is_infinite() && b.is_infinite()) || (a - b).abs() <= 1e-11 * (1.0 + a.abs())
    };
    if !close(lhs, report.lhs) || !close(rhs, report.rhs) {
        return Err(Error::InvalidParameter(format!(
            "fast sweep diverged from the reference verifier on pair ({i},{j}): \
             ({lhs}, {rhs}) vs ({}, {})",
            report.lhs, report.rhs
        )));
    }
    Ok(())
}

fn random_simplex(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| -rng.random::<f64>().ln()).collect();
    let sum: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / sum).collect()
}

/// Scales a simplex vector so that every neighbour-pair ratio sits within
/// `e^{±bound}`: exponent tempering preserves the simplex and caps ratios.
fn enforce_ratio_bound(probs: &[f64], neighbour_map: &[usize], bound: f64) -> Vec<f64> {
    let mut worst: f64 = 1.0;
    for (i, &j) in neighbour_map.iter().enumerate() {
        let r = probs[i] / probs[j];
        worst = worst.max(r.max(1.0 / r));
    }
    if worst.ln() <= bound {
        return probs.to_vec();
    }
    let s = bound / worst.ln() * (1.0 - 1e-9);
    let tempered: Vec<f64> = probs.iter().map(|p| p.powf(s)).collect();
    let sum: f64 = tempered.iter().sum();
    tempered.into_iter().map(|p| p / sum).collect()
}

/// Randomized sweep of the neighbouring-history decomposition bound:
/// seeded distribution pairs on a small space with enforced ratio bounds and
/// a random neighbour bijection.
pub fn neighbour_ratio_sweep(
    ratio_bounds: &[f64],
    pairs_per_bound: usize,
    space_size: usize,
    seed: u64,
    tolerance: f64,
) -> Result<SweepOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stats = CellStats::empty();
    for &bound in ratio_bounds {
        for iteration in 0..pairs_per_bound {
            let mut map: Vec<usize> = (0..space_size).collect();
            map.shuffle(&mut rng);
            let p1 = enforce_ratio_bound(&random_simplex(space_size, &mut rng), &map, bound);
            let p2 = enforce_ratio_bound(&random_simplex(space_size, &mut rng), &map, bound);
            let report = verify_neighbour_ratio_decomposition(
                &FiniteDistribution::from_probs(p1)?,
                &FiniteDistribution::from_probs(p2)?,
                &map,
                bound,
                tolerance,
            )?;
            stats.cells += 1;
            match report.verdict {
                Verdict::Pass => {
                    if report.slack.is_finite() {
                        stats.min_slack = stats.min_slack.min(report.slack);
                    }
                }
                _ => {
                    stats.failures += 1;
                    stats.worst = Some((
                        f64::INFINITY,
                        format!(
                            "bound={bound} iteration={iteration} verdict={:?}",
                            report.verdict
                        ),
                    ));
                }
            }
        }
    }
    Ok(SweepOutcome {
        name: "neighbour-ratio-kl-bound".into(),
        cells: stats.cells,
        failures: stats.failures,
        max_abs_slack: 0.0,
        min_slack: stats.min_slack,
        worst_cell: stats.worst.map(|(_, w)| w),
        notes: None,
    })
}

/// Randomized Pinsker sweep: `‖p − q‖₁² ≤ 2·KL(p‖q)` on seeded simplex pairs.
pub fn pinsker_sweep(instances: usize, seed: u64) -> Result<SweepOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stats = CellStats::empty();
    for i in 0..instances {
        let n = rng.random_range(2..=6);
        let p = FiniteDistribution::from_probs(random_simplex(n, &mut rng))?;
        let q = FiniteDistribution::from_probs(random_simplex(n, &mut rng))?;
        let l1 = tv_l1(&p, &q)?;
        let divergence = kl(&p, &q);
        let slack = 2.0 * divergence - l1 * l1;
        stats.cells += 1;
        if slack < -1e-12 {
            stats.failures += 1;
            stats.worst = Some((-slack, format!("instance={i}")));
        } else if slack.is_finite() {
            stats.min_slack = stats.min_slack.min(slack);
        }
    }
    Ok(SweepOutcome {
        name: "pinsker".into(),
        cells: stats.cells,
        failures: stats.failures,
        max_abs_slack: 0.0,
        min_slack: stats.min_slack,
        worst_cell: stats.worst.map(|(_, w)| w),
        notes: None,
    })
}

/// Randomized Bretagnolle–Huber sweep:
/// `P(E) + Q(E^c) ≥ ½·e^{−KL(P‖Q)}` on seeded (P, Q, E) triples. How often
/// the stricter un-halved form also held is reported as a note.
pub fn bretagnolle_huber_sweep(instances: usize, seed: u64) -> Result<SweepOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stats = CellStats::empty();
    let mut strict_failures = 0usize;
    for i in 0..instances {
        let n = 8;
        let p = FiniteDistribution::from_probs(random_simplex(n, &mut rng))?;
        let q = FiniteDistribution::from_probs(random_simplex(n, &mut rng))?;
        let event: Vec<bool> = (0..n).map(|_| rng.random()).collect();
        let p_event: f64 = p
            .probs()
            .iter()
            .zip(&event)
            .filter(|(_, &e)| e)
            .map(|(&x, _)| x)
            .sum();
        let q_complement: f64 = q
            .probs()
            .iter()
            .zip(&event)
            .filter(|(_, &e)| !e)
            .map(|(&x, _)| x)
            .sum();
        let divergence = kl(&p, &q);
        stats.cells += 1;
        if !bretagnolle_huber(p_event, q_complement, divergence) {
            stats.failures += 1;
            stats.worst = Some((1.0, format!("instance={i}")));
        } else {
            let slack = p_event + q_complement - 0.5 * (-divergence).exp();
            stats.min_slack = stats.min_slack.min(slack);
        }
        if !bretagnolle_huber_strict(p_event, q_complement, divergence) {
            strict_failures += 1;
        }
    }
    Ok(SweepOutcome {
        name: "bretagnolle-huber".into(),
        cells: stats.cells,
        failures: stats.failures,
        max_abs_slack: 0.0,
        min_slack: stats.min_slack,
        worst_cell: stats.worst.map(|(_, w)| w),
        notes: Some(format!(
            "strict (un-halved) form held on {}/{} instances",
            instances - strict_failures,
            instances
        )),
    })
}

/// Audits randomized response across a privacy grid and checks the measured
/// level equals the configured one to within `tolerance`.
pub fn channel_exactness_sweep(epsilons: &[f64], tolerance: f64) -> Result<SweepOutcome> {
    let mut stats = CellStats::empty();
    for &eps in epsilons {
        let mech = Mechanism::randomized_response(eps)?;
        let report = audit_local_mechanism(&mech, &[0.0, 1.0])?;
        let diff = (report.epsilon_measured - eps).abs();
        stats.cells += 1;
        stats.max_abs_slack = stats.max_abs_slack.max(diff);
        if diff > tolerance {
            stats.failures += 1;
            stats.worst = Some((diff, format!("eps={eps}")));
        }
    }
    Ok(SweepOutcome {
        name: "channel-audit-exactness".into(),
        cells: stats.cells,
        failures: stats.failures,
        max_abs_slack: stats.max_abs_slack,
        min_slack: f64::INFINITY,
        worst_cell: stats.worst.map(|(_, w)| w),
        notes: None,
    })
}

/// Seeded random auditable policies, each audited with respect to full
/// outcome matrices and with respect to realized reward sequences; the two
/// measurements must agree.
pub fn equivalence_sweep(
    policies: usize,
    num_arms: usize,
    horizon: usize,
    seed: u64,
    cap: u128,
    tolerance: f64,
) -> Result<SweepOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stats = CellStats::empty();
    for i in 0..policies {
        let beta = rng.random::<f64>() * 8.0;
        let policy = if i % 2 == 0 {
            Policy::softmax(beta)?
        } else {
            let eps = 0.2 + rng.random::<f64>() * 1.8;
            ldp_pipeline(
                &Policy::softmax(beta)?,
                &Mechanism::randomized_response(eps)?,
            )?
        };
        let report = verify_equivalence(&policy, num_arms, &[0.0, 1.0], horizon, cap, tolerance)?;
        stats.cells += 1;
        if report.difference.is_finite() {
            stats.max_abs_slack = stats.max_abs_slack.max(report.difference);
        }
        if !report.passed {
            stats.failures += 1;
            stats.worst = Some((report.difference, format!("policy={i} beta={beta}")));
        }
    }
    Ok(SweepOutcome {
        name: "outcome-reward-equivalence".into(),
        cells: stats.cells,
        failures: stats.failures,
        max_abs_slack: stats.max_abs_slack,
        min_slack: f64::INFINITY,
        worst_cell: stats.worst.map(|(_, w)| w),
        notes: None,
    })
}

/// The default policy grid for composition audits: every auditable kind at a
/// few sharpness and privacy settings.
fn composition_grid() -> Result<Vec<(Policy, usize, usize)>> {
    let rr1 = Mechanism::randomized_response(1.0)?;
    let rr_ln3 = Mechanism::randomized_response(3.0f64.ln())?;
    let mut grid = Vec::new();
    for t in [2usize, 3] {
        grid.push((Policy::uniform(), 2, t));
        grid.push((Policy::softmax(1.0)?, 2, t));
        grid.push((Policy::softmax(5.0)?, 2, t));
        grid.push((ldp_pipeline(&Policy::softmax(2.0)?, &rr1)?, 2, t));
        grid.push((ldp_pipeline(&Policy::softmax(5.0)?, &rr_ln3)?, 2, t));
    }
    grid.push((Policy::uniform(), 3, 2));
    grid.push((Policy::softmax(1.0)?, 3, 2));
    Ok(grid)
}

/// Audits every grid policy under both the pan and instantaneous definitions
/// and checks `ε̂_inst ≤ 2·ε̂_pan` and `ε̂_pan ≤ T·ε̂_inst`.
pub fn composition_sweep(cap: u128, tolerance: f64) -> Result<SweepOutcome> {
    let mut stats = CellStats::empty();
    for (policy, k, t) in composition_grid()? {
        let report = verify_composition(&policy, k, &[0.0, 1.0], t, cap, tolerance)?;
        stats.cells += 1;
        if report.pan_epsilon.is_finite() && report.instantaneous_epsilon.is_finite() {
            let slack = (2.0 * report.pan_epsilon - report.instantaneous_epsilon)
                .min(t as f64 * report.instantaneous_epsilon - report.pan_epsilon);
            stats.min_slack = stats.min_slack.min(slack);
        }
        if !report.passed() {
            stats.failures += 1;
            stats.worst = Some((1.0, format!("policy={} K={k} T={t}", policy.kind_name())));
        }
    }
    Ok(SweepOutcome {
        name: "pan-instantaneous-composition".into(),
        cells: stats.cells,
        failures: stats.failures,
        max_abs_slack: 0.0,
        min_slack: stats.min_slack,
        worst_cell: stats.worst.map(|(_, w)| w),
        notes: None,
    })
}

/// Checks that every bound family is strictly decreasing in ε along the
/// 0.1-grid of (0, 4].
pub fn bound_monotonicity_sweep(num_arms: usize, horizon: u64) -> Result<SweepOutcome> {
    let grid: Vec<f64> = (1..=40).map(|i| i as f64 / 10.0).collect();
    let env = Environment::bernoulli(&[0.75, 0.5])?;
    let series: Vec<(&str, Vec<f64>)> = vec![
        (
            "local",
            grid.iter()
                .map(|&e| {
                    minimax_lb_local(num_arms, horizon, e, ConstantMode::RateOnly).map(|s| s.value)
                })
                .collect::<Result<_>>()?,
        ),
        (
            "instantaneous",
            grid.iter()
                .map(|&e| {
                    minimax_lb_instantaneous(num_arms, horizon, e, ConstantMode::RateOnly)
                        .map(|s| s.value)
                })
                .collect::<Result<_>>()?,
        ),
        (
            "dp-appendix",
            grid.iter()
                .map(|&e| {
                    minimax_lb_dp(num_arms, horizon, e, 0.0, DpVariant::AppendixDerivation)
                        .map(|s| s.value)
                })
                .collect::<Result<_>>()?,
        ),
        (
            "dp-theorem-text",
            grid.iter()
                .map(|&e| {
                    minimax_lb_dp(num_arms, horizon, e, 0.0, DpVariant::TheoremText)
                        .map(|s| s.value)
                })
                .collect::<Result<_>>()?,
        ),
        (
            "local-problem-dep",
            grid.iter()
                .map(|&e| problem_dependent_lb_local(&env, e).map(|s| s.value))
                .collect::<Result<_>>()?,
        ),
    ];
    let mut stats = CellStats::empty();
    for (name, values) in &series {
        for (i, w) in values.windows(2).enumerate() {
            stats.cells += 1;
            let drop = w[0] - w[1];
            if drop <= 0.0 {
                stats.failures += 1;
                stats.worst = Some((-drop, format!("{name} eps={}", grid[i + 1])));
            } else {
                stats.min_slack = stats.min_slack.min(drop);
            }
        }
    }
    Ok(SweepOutcome {
        name: "bound-monotonicity-in-epsilon".into(),
        cells: stats.cells,
        failures: stats.failures,
        max_abs_slack: 0.0,
        min_slack: stats.min_slack,
        worst_cell: stats.worst.map(|(_, w)| w),
        notes: None,
    })
}

/// Checks the `sqrt(T)` scaling of the minimax bounds in rate-only mode:
/// quadrupling the horizon must exactly double the value.
pub fn bound_scaling_sweep(num_arms: usize, horizon: u64, tolerance: f64) -> Result<SweepOutcome> {
    let mut stats = CellStats::empty();
    for eps in [0.5, 1.0, 2.0] {
        let pairs: Vec<(&str, f64, f64)> = vec![
            (
                "local",
                minimax_lb_local(num_arms, horizon, eps, ConstantMode::RateOnly)?.value,
                minimax_lb_local(num_arms, 4 * horizon, eps, ConstantMode::RateOnly)?.value,
            ),
            (
                "instantaneous",
                minimax_lb_instantaneous(num_arms, horizon, eps, ConstantMode::RateOnly)?.value,
                minimax_lb_instantaneous(num_arms, 4 * horizon, eps, ConstantMode::RateOnly)?.value,
            ),
            (
                "dp-appendix",
                minimax_lb_dp(num_arms, horizon, eps, 0.0, DpVariant::AppendixDerivation)?.value,
                minimax_lb_dp(
                    num_arms,
                    4 * horizon,
                    eps,
                    0.0,
                    DpVariant::AppendixDerivation,
                )?
                .value,
            ),
        ];
        for (name, v1, v4) in pairs {
            stats.cells += 1;
            let relative = (v4 / v1 / 2.0 - 1.0).abs();
            stats.max_abs_slack = stats.max_abs_slack.max(relative);
            if relative > tolerance {
                stats.failures += 1;
                stats.worst = Some((relative, format!("{name} eps={eps}")));
            }
        }
    }
    Ok(SweepOutcome {
        name: "bound-sqrt-horizon-scaling".into(),
        cells: stats.cells,
        failures: stats.failures,
        max_abs_slack: stats.max_abs_slack,
        min_slack: f64::INFINITY,
        worst_cell: stats.worst.map(|(_, w)| w),
        notes: None,
    })
}

/// Runs every sweep at its standard grid and returns the outcomes.
pub fn full_sweep(cap: u128) -> Result<Vec<SweepOutcome>> {
    Ok(vec![
        kl_decomposition_sweep(&[2, 3], &[1, 2, 3], &[0.0, 1.0, 5.0], 0.25, cap, 1e-9)?,
        local_private_sweep(
            &[2, 3],
            &[1, 2, 3],
            &[0.0, 1.0, 5.0],
            &[0.1, 0.5, 1.0, 2.0],
            0.25,
            cap,
            1e-9,
        )?,
        neighbour_ratio_sweep(&[0.1, 0.5, 1.0], 1000, 8, 0x6e1d, 1e-9)?,
        pinsker_sweep(1000, 0x11a5)?,
        bretagnolle_huber_sweep(1000, 0xb4)?,
        channel_exactness_sweep(&[0.1, 0.5, 1.0, 3.0f64.ln(), 2.0], 1e-12)?,
        equivalence_sweep(20, 2, 2, 0x9a7e, cap, 1e-9)?,
        composition_sweep(cap, 1e-9)?,
        bound_monotonicity_sweep(2, 10_000)?,
        bound_scaling_sweep(2, 10_000, 1e-9)?,
    ])
}
