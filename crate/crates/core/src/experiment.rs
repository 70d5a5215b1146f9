//! Seeded experiment harness: regret curves over replicated episodes, with
//! optional hard-instance environment pairs and lower-bound overlays, and
//! deterministic CSV output.

use std::io::Write;
use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{
    bayes_minimax_lb_dp, bayes_minimax_lb_instantaneous, bayes_minimax_lb_local,
    hard_instance_pair, minimax_lb_dp, minimax_lb_instantaneous, minimax_lb_local,
    minimax_lb_nonprivate, problem_dependent_lb_local, problem_dependent_lb_nonprivate, BoundSpec,
    ConstantMode, DpVariant, HardInstanceRegime, Regime,
};
use crate::env::{run_episode, Environment};
use crate::error::{Error, Result};
use crate::policy::Policy;

/// Environment variable controlling the replication worker count.
pub const WORKER_COUNT_VAR: &str = "PRIVBANDIT_WORKERS";

/// Either an explicit environment or a request for a hard-instance pair
/// built from the experiment's arm count and horizon.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EnvironmentSpec {
    HardInstance {
        regime: HardInstanceRegime,
        num_arms: usize,
        epsilon: f64,
        #[serde(default)]
        lipschitz_budget: f64,
    },
    Explicit(Environment),
}

/// A lower-bound overlay request, evaluated at the experiment's geometry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundRequest {
    pub regime: Regime,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub constant_mode: Option<ConstantMode>,
    #[serde(default)]
    pub variant: Option<DpVariant>,
    #[serde(default)]
    pub lipschitz_budget: f64,
}

fn default_grid_points() -> usize {
    100
}

fn default_replications() -> usize {
    1
}

/// A full experiment description; parses from JSON config files.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub policy: Policy,
    pub environment: EnvironmentSpec,
    pub horizon: usize,
    #[serde(default = "default_replications")]
    pub replications: usize,
    pub seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
    #[serde(default)]
    pub overlays: Vec<BoundRequest>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }
}

/// Mean cumulative regret of one environment across replications.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EnvCurve {
    pub env_index: usize,
    pub mean_regret: Vec<f64>,
    pub stderr: Vec<f64>,
    /// Mean pull counts at the horizon; `min_a` of this is the empirical
    /// check for per-arm pull-count preconditions.
    pub mean_pull_counts: Vec<f64>,
}

/// Regret curves on a common time grid, the max-over-pair envelope, and any
/// evaluated bound overlays.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RegretCurve {
    pub times: Vec<usize>,
    pub per_env: Vec<EnvCurve>,
    pub max_over_env: Vec<f64>,
    pub overlays: Vec<BoundSpec>,
}

impl RegretCurve {
    /// Mean regret at the horizon for one environment.
    pub fn final_mean_regret(&self, env_index: usize) -> f64 {
        *self.per_env[env_index]
            .mean_regret
            .last()
            .expect("nonempty grid")
    }

    /// Largest final mean regret across the environments.
    pub fn max_final_regret(&self) -> f64 {
        *self.max_over_env.last().expect("nonempty grid")
    }

    /// CSV in the schema `t,mean_regret,stderr,env_index`, with the
    /// max-over-pair envelope appended under `env_index = max`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,mean_regret,stderr,env_index\n");
        for curve in &self.per_env {
            for (i, &t) in self.times.iter().enumerate() {
                out.push_str(&format!(
                    "{t},{},{},{}\n",
                    curve.mean_regret[i], curve.stderr[i], curve.env_index
                ));
            }
        }
        if self.per_env.len() > 1 {
            for (i, &t) in self.times.iter().enumerate() {
                out.push_str(&format!("{t},{},0,max\n", self.max_over_env[i]));
            }
        }
        out
    }
}

fn resolve_environments(config: &ExperimentConfig) -> Result<Vec<Environment>> {
    match &config.environment {
        EnvironmentSpec::Explicit(env) => Ok(vec![env.clone()]),
        EnvironmentSpec::HardInstance {
            regime,
            num_arms,
            epsilon,
            lipschitz_budget,
        } => {
            let pair = hard_instance_pair(
                *num_arms,
                config.horizon as u64,
                *epsilon,
                *regime,
                *lipschitz_budget,
            )?;
            Ok(vec![pair.env1, pair.env2])
        }
    }
}

fn time_grid(horizon: usize, points: usize) -> Vec<usize> {
    let points = points.max(1).min(horizon);
    let mut grid: Vec<usize> = (1..=points)
        .map(|i| (i * horizon).div_ceil(points))
        .collect();
    grid.dedup();
    if grid.last() != Some(&horizon) {
        grid.push(horizon);
    }
    grid
}

fn replication_seed(master: u64, env_index: usize, replication: usize) -> u64 {
    master
        .wrapping_add((env_index as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15))
        .wrapping_add(replication as u64)
}

fn evaluate_overlay(
    request: &BoundRequest,
    num_arms: usize,
    horizon: u64,
    default_epsilon: Option<f64>,
    env: &Environment,
) -> Result<BoundSpec> {
    let epsilon = request.epsilon.or(default_epsilon).unwrap_or(f64::INFINITY);
    let mode = request.constant_mode.unwrap_or(ConstantMode::ProofConstant);
    let variant = request.variant.unwrap_or_default();
    match request.regime {
        Regime::Local => minimax_lb_local(num_arms, horizon, epsilon, mode),
        Regime::Instantaneous => minimax_lb_instantaneous(num_arms, horizon, epsilon, mode),
        Regime::Dp => minimax_lb_dp(
            num_arms,
            horizon,
            epsilon,
            request.lipschitz_budget,
            variant,
        ),
        Regime::BayesLocal => bayes_minimax_lb_local(num_arms, horizon, epsilon, mode),
        Regime::BayesInstantaneous => {
            bayes_minimax_lb_instantaneous(num_arms, horizon, epsilon, mode)
        }
        Regime::BayesDp => bayes_minimax_lb_dp(
            num_arms,
            horizon,
            epsilon,
            request.lipschitz_budget,
            variant,
        ),
        Regime::NonprivateMinimax => minimax_lb_nonprivate(num_arms, horizon, mode),
        Regime::LocalProblemDep => problem_dependent_lb_local(env, epsilon),
        Regime::NonprivateProblemDep => problem_dependent_lb_nonprivate(env),
    }
}

/// Runs the configured experiment: `replications` seeded episodes per
/// environment, aggregated into mean regret curves with standard errors.
/// Identical configs and master seeds produce bit-identical output.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RegretCurve> {
    if config.replications < 1 {
        return Err(Error::Config("replications must be at least 1".into()));
    }
    if config.horizon < 1 {
        return Err(Error::Config("horizon must be at least 1".into()));
    }
    let envs = resolve_environments(config)?;
    let times = time_grid(config.horizon, config.grid_points);
    let pool = worker_pool()?;

    let mut per_env = Vec::with_capacity(envs.len());
    for (env_index, env) in envs.iter().enumerate() {
        let gaps = env.gaps();
        let num_arms = env.num_arms();
        let run_one = |replication: usize| -> Result<(Vec<f64>, Vec<u64>)> {
            let seed = replication_seed(config.seed, env_index, replication);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let episode = run_episode(&config.policy, env, config.horizon, &mut rng)?;
            let mut curve = Vec::with_capacity(times.len());
            let mut cumulative = 0.0;
            let mut next = 0;
            for (t, step) in episode.history.steps().iter().enumerate() {
                cumulative += gaps[step.action];
                while next < times.len() && times[next] == t + 1 {
                    curve.push(cumulative);
                    next += 1;
                }
            }
            let counts = episode.history.pull_counts(num_arms)?;
            Ok((curve, counts))
        };
        let results: Vec<(Vec<f64>, Vec<u64>)> = match &pool {
            Some(p) => p.install(|| {
                (0..config.replications)
                    .into_par_iter()
                    .map(run_one)
                    .collect::<Result<Vec<_>>>()
            })?,
            None => (0..config.replications)
                .into_par_iter()
                .map(run_one)
                .collect::<Result<Vec<_>>>()?,
        };

        // Aggregate in replication order so the output is schedule-independent.
        let r = config.replications as f64;
        let mut mean = vec![0.0; times.len()];
        let mut mean_sq = vec![0.0; times.len()];
        let mut mean_counts = vec![0.0; num_arms];
        for (curve, counts) in &results {
            for (i, &v) in curve.iter().enumerate() {
                mean[i] += v / r;
                mean_sq[i] += v * v / r;
            }
            for (a, &c) in counts.iter().enumerate() {
                mean_counts[a] += c as f64 / r;
            }
        }
        let stderr: Vec<f64> = mean
            .iter()
            .zip(&mean_sq)
            .map(|(&m, &sq)| {
                if config.replications < 2 {
                    0.0
                } else {
                    let var = (sq - m * m).max(0.0) * r / (r - 1.0);
                    (var / r).sqrt()
                }
            })
            .collect();
        per_env.push(EnvCurve {
            env_index,
            mean_regret: mean,
            stderr,
            mean_pull_counts: mean_counts,
        });
    }

    let max_over_env: Vec<f64> = (0..times.len())
        .map(|i| {
            per_env
                .iter()
                .map(|c| c.mean_regret[i])
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();

    let default_epsilon = match &config.environment {
        EnvironmentSpec::HardInstance { epsilon, .. } => Some(*epsilon),
        EnvironmentSpec::Explicit(_) => None,
    };
    let overlays = config
        .overlays
        .iter()
        .map(|req| {
            evaluate_overlay(
                req,
                envs[0].num_arms(),
                config.horizon as u64,
                default_epsilon,
                &envs[0],
            )
        })
        .collect::<Result<Vec<_>>>()?;

    let curve = RegretCurve {
        times,
        per_env,
        max_over_env,
        overlays,
    };

    if let Some(path) = &config.output {
        let mut file = std::fs::File::create(path)
            .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))?;
        file.write_all(curve.to_csv().as_bytes())?;
    }
    Ok(curve)
}

fn worker_pool() -> Result<Option<rayon::ThreadPool>> {
    match std::env::var(WORKER_COUNT_VAR) {
        Ok(raw) => {
            let workers: usize = raw.parse().map_err(|_| {
                Error::Config(format!(
                    "{WORKER_COUNT_VAR} must be a positive integer, got {raw}"
                ))
            })?;
            if workers == 0 {
                return Err(Error::Config(format!(
                    "{WORKER_COUNT_VAR} must be a positive integer, got 0"
                )));
            }
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .build()
                .map_err(|e| Error::Config(e.to_string()))?;
            Ok(Some(pool))
        }
        Err(_) => Ok(None),
    }
}
