//! Command-line front end: seeded simulations with bound overlays, bound
//! tables, exact privacy audits, and verification sweeps.

use std::fs;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use privbandit::audit::{
    audit_environment_privacy, audit_instantaneous_dp, audit_local_mechanism, audit_pan_dp,
};
use privbandit::bounds::{
    bayes_minimax_lb_dp, bayes_minimax_lb_instantaneous, bayes_minimax_lb_local, dp_threshold,
    local_threshold, minimax_lb_dp, minimax_lb_instantaneous, minimax_lb_local,
    minimax_lb_nonprivate, problem_dependent_lb_local, problem_dependent_lb_nonprivate, BoundSpec,
    ConstantMode, DpVariant, HardInstanceRegime, Regime,
};
use privbandit::env::{Environment, DEFAULT_ENUMERATION_CAP};
use privbandit::experiment::{run_experiment, BoundRequest, EnvironmentSpec, ExperimentConfig};
use privbandit::mechanism::Mechanism;
use privbandit::policy::Policy;
use privbandit::sweeps::{
    bretagnolle_huber_sweep, composition_sweep, equivalence_sweep, full_sweep,
    kl_decomposition_sweep, local_private_sweep, neighbour_ratio_sweep, pinsker_sweep,
    SweepOutcome,
};

#[derive(Parser)]
#[command(
    name = "privbandit",
    about = "Privacy-preserving bandits: simulations, regret lower bounds, and exact privacy audits",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a seeded regret experiment and emit CSV curves.
    Simulate(SimulateArgs),
    /// Evaluate regret lower bounds and thresholds as CSV.
    Bounds(BoundsArgs),
    /// Measure the exact privacy level of a policy or mechanism.
    Audit(AuditArgs),
    /// Verify one decomposition or inequality family.
    #[command(name = "verify-lemma")]
    VerifyLemma(VerifyLemmaArgs),
    /// Run every verification sweep and print a pass/fail summary.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Experiment config file (JSON). Flags below override its fields.
    #[arg(long)]
    config: Option<String>,
    /// Policy JSON, or @path to a JSON file.
    #[arg(long)]
    policy: Option<String>,
    /// Environment JSON, or @path to a JSON file.
    #[arg(long)]
    env: Option<String>,
    /// Use the hard-instance pair for this regime instead of --env.
    #[arg(long, value_enum)]
    hard_instance: Option<HardRegimeArg>,
    /// Arm count for the hard-instance pair.
    #[arg(long, default_value_t = 2)]
    arms: usize,
    /// Privacy level for the hard-instance pair (and default overlay epsilon).
    #[arg(long)]
    epsilon: Option<f64>,
    /// Lipschitz budget c = L·Δ for the dp regime.
    #[arg(long, default_value_t = 0.0)]
    c: f64,
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// CSV output path.
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    grid_points: Option<usize>,
    /// Bound overlays, e.g. `local:proof-constant` or `dp:appendix-derivation`.
    #[arg(long = "overlay")]
    overlays: Vec<String>,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long, value_enum)]
    regime: RegimeArg,
    #[arg(long = "K", alias = "k", default_value_t = 2)]
    num_arms: usize,
    #[arg(long = "T", alias = "t", default_value_t = 0)]
    horizon: u64,
    #[arg(long, default_value_t = 1.0)]
    epsilon: f64,
    /// Lipschitz budget c = L·Δ (dp regime).
    #[arg(long, default_value_t = 0.0)]
    c: f64,
    /// rate-only | proof-constant | a custom numeric constant.
    #[arg(long, default_value = "rate-only")]
    constant: String,
    #[arg(long, value_enum, default_value_t = VariantArg::AppendixDerivation)]
    variant: VariantArg,
    /// Bernoulli means for problem-dependent regimes, e.g. `0.75,0.5`.
    #[arg(long)]
    means: Option<String>,
    /// Environment JSON (alternative to --means), or @path.
    #[arg(long)]
    env: Option<String>,
}

#[derive(Args)]
struct AuditArgs {
    #[arg(long, value_enum)]
    definition: DefinitionArg,
    /// Policy JSON, or @path (pan-dp, instantaneous-dp, environment).
    #[arg(long)]
    policy: Option<String>,
    /// Mechanism kind for local-mechanism audits: rr | laplace | identity.
    #[arg(long)]
    mechanism: Option<String>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    sensitivity: f64,
    #[arg(long = "K", alias = "k", default_value_t = 2)]
    num_arms: usize,
    #[arg(long = "T", alias = "t", default_value_t = 2)]
    horizon: usize,
    /// Comma-separated reward alphabet.
    #[arg(long, default_value = "0,1")]
    alphabet: String,
    /// First environment (environment audits), JSON or @path.
    #[arg(long)]
    env1: Option<String>,
    /// Second environment (environment audits), JSON or @path.
    #[arg(long)]
    env2: Option<String>,
    /// Environment distance ρ; defaults to the L∞ distance between means.
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
    cap: u128,
}

#[derive(Args)]
struct VerifyLemmaArgs {
    /// 3 | 4 | 6 | equivalence | composition | pinsker | bretagnolle-huber
    #[arg(value_parser = ["3", "4", "6", "equivalence", "composition", "pinsker", "bretagnolle-huber"])]
    lemma: String,
    #[arg(long = "K", alias = "k", default_value_t = 2)]
    num_arms: usize,
    #[arg(long = "T", alias = "t", default_value_t = 3)]
    horizon: usize,
    /// Bernoulli grid step for the environment sweeps.
    #[arg(long, default_value_t = 0.25)]
    grid: f64,
    /// Softmax sharpness values.
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.0, 1.0, 5.0])]
    betas: Vec<f64>,
    /// Privacy levels for the locally private sweep.
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.1, 0.5, 1.0, 2.0])]
    epsilons: Vec<f64>,
    /// Ratio bounds ε+c for the neighbouring-history sweep.
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.1, 0.5, 1.0])]
    ratio_bounds: Vec<f64>,
    /// Randomized instances per setting.
    #[arg(long, default_value_t = 1000)]
    instances: usize,
    #[arg(long, default_value_t = 0x6e1d)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
    cap: u128,
    #[arg(long, default_value_t = 1e-9)]
    tolerance: f64,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
    cap: u128,
}

#[derive(Clone, Copy, ValueEnum)]
enum HardRegimeArg {
    Local,
    Dp,
}

impl From<HardRegimeArg> for HardInstanceRegime {
    fn from(value: HardRegimeArg) -> Self {
        match value {
            HardRegimeArg::Local => HardInstanceRegime::Local,
            HardRegimeArg::Dp => HardInstanceRegime::Dp,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum RegimeArg {
    Local,
    Instantaneous,
    Dp,
    BayesLocal,
    BayesInstantaneous,
    BayesDp,
    NonprivateMinimax,
    LocalProblemDep,
    NonprivateProblemDep,
    LocalThreshold,
    DpThreshold,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum VariantArg {
    AppendixDerivation,
    TheoremText,
}

impl From<VariantArg> for DpVariant {
    fn from(value: VariantArg) -> Self {
        match value {
            VariantArg::AppendixDerivation => DpVariant::AppendixDerivation,
            VariantArg::TheoremText => DpVariant::TheoremText,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum DefinitionArg {
    PanDp,
    InstantaneousDp,
    LocalMechanism,
    Environment,
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run() -> Result<ExitCode> {
    match Cli::parse().command {
        Command::Simulate(args) => simulate(args),
        Command::Bounds(args) => bounds(args),
        Command::Audit(args) => audit(args),
        Command::VerifyLemma(args) => verify_lemma(args),
        Command::Sweep(args) => sweep(args),
    }
}

/// Reads inline JSON, or the contents of a file when prefixed with `@`.
fn json_or_file(raw: &str) -> Result<String> {
    if let Some(path) = raw.strip_prefix('@') {
        fs::read_to_string(path).with_context(|| format!("reading {path}"))
    } else {
        Ok(raw.to_string())
    }
}

fn parse_policy(raw: &str) -> Result<Policy> {
    let text = json_or_file(raw)?;
    serde_json::from_str(&text).with_context(|| format!("parsing policy config {text}"))
}

fn parse_environment(raw: &str) -> Result<Environment> {
    let text = json_or_file(raw)?;
    serde_json::from_str(&text).with_context(|| format!("parsing environment config {text}"))
}

fn parse_floats(raw: &str) -> Result<Vec<f64>> {
    raw.split(',')
        .map(|part| {
            part.trim()
                .parse::<f64>()
                .with_context(|| format!("parsing number {part}"))
        })
        .collect()
}

fn parse_constant(raw: &str) -> Result<ConstantMode> {
    match raw {
        "rate-only" => Ok(ConstantMode::RateOnly),
        "proof-constant" => Ok(ConstantMode::ProofConstant),
        other => {
            let value: f64 = other.parse().with_context(|| {
                format!("constant mode must be rate-only, proof-constant, or a number, got {other}")
            })?;
            Ok(ConstantMode::Custom(value))
        }
    }
}

fn parse_overlay(raw: &str) -> Result<BoundRequest> {
    let mut parts = raw.split(':');
    let regime = match parts.next().unwrap_or_default() {
        "local" => Regime::Local,
        "instantaneous" => Regime::Instantaneous,
        "dp" => Regime::Dp,
        "bayes-local" => Regime::BayesLocal,
        "bayes-instantaneous" => Regime::BayesInstantaneous,
        "bayes-dp" => Regime::BayesDp,
        "nonprivate-minimax" => Regime::NonprivateMinimax,
        "local-problem-dep" => Regime::LocalProblemDep,
        "nonprivate-problem-dep" => Regime::NonprivateProblemDep,
        other => bail!("unknown overlay regime {other}"),
    };
    let mut request = BoundRequest {
        regime,
        epsilon: None,
        constant_mode: None,
        variant: None,
        lipschitz_budget: 0.0,
    };
    for part in parts {
        match part {
            "rate-only" => request.constant_mode = Some(ConstantMode::RateOnly),
            "proof-constant" => request.constant_mode = Some(ConstantMode::ProofConstant),
            "appendix-derivation" => request.variant = Some(DpVariant::AppendixDerivation),
            "theorem-text" => request.variant = Some(DpVariant::TheoremText),
            other => {
                let value: f64 = other
                    .parse()
                    .with_context(|| format!("unknown overlay modifier {other}"))?;
                request.epsilon = Some(value);
            }
        }
    }
    Ok(request)
}

fn simulate(args: SimulateArgs) -> Result<ExitCode> {
    let mut config = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
            ExperimentConfig::from_json(&text)?
        }
        None => ExperimentConfig {
            policy: Policy::uniform(),
            environment: EnvironmentSpec::Explicit(Environment::bernoulli(&[0.5, 0.5])?),
            horizon: 1000,
            replications: 1,
            seed: 0,
            output: None,
            grid_points: 100,
            overlays: Vec::new(),
        },
    };
    if let Some(raw) = &args.policy {
        config.policy = parse_policy(raw)?;
    }
    match (&args.env, args.hard_instance) {
        (Some(_), Some(_)) => bail!("--env and --hard-instance are mutually exclusive"),
        (Some(raw), None) => {
            config.environment = EnvironmentSpec::Explicit(parse_environment(raw)?)
        }
        (None, Some(regime)) => {
            config.environment = EnvironmentSpec::HardInstance {
                regime: regime.into(),
                num_arms: args.arms,
                epsilon: args.epsilon.context("--hard-instance requires --epsilon")?,
                lipschitz_budget: args.c,
            }
        }
        (None, None) => {}
    }
    if let Some(h) = args.horizon {
        config.horizon = h;
    }
    if let Some(r) = args.reps {
        config.replications = r;
    }
    if let Some(s) = args.seed {
        config.seed = s;
    }
    if let Some(g) = args.grid_points {
        config.grid_points = g;
    }
    if let Some(out) = &args.out {
        config.output = Some(out.into());
    }
    for raw in &args.overlays {
        config.overlays.push(parse_overlay(raw)?);
    }

    let curve = run_experiment(&config)?;
    for env_curve in &curve.per_env {
        let min_pulls = env_curve
            .mean_pull_counts
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        println!(
            "env {}: final mean regret {} (stderr {}), min mean pull count {min_pulls}",
            env_curve.env_index,
            env_curve.mean_regret.last().unwrap(),
            env_curve.stderr.last().unwrap(),
        );
    }
    if curve.per_env.len() > 1 {
        println!("max-over-pair final regret {}", curve.max_final_regret());
    }
    for overlay in &curve.overlays {
        println!(
            "overlay {} = {}{}",
            overlay.regime,
            overlay.value,
            if overlay.warnings.is_empty() {
                String::new()
            } else {
                format!("  [{}]", overlay.warnings.join("; "))
            }
        );
    }
    if let Some(path) = &config.output {
        println!("wrote {}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn bounds(args: BoundsArgs) -> Result<ExitCode> {
    let mode = parse_constant(&args.constant)?;
    let env = match (&args.means, &args.env) {
        (Some(_), Some(_)) => bail!("--means and --env are mutually exclusive"),
        (Some(means), None) => Some(Environment::bernoulli(&parse_floats(means)?)?),
        (None, Some(raw)) => Some(parse_environment(raw)?),
        (None, None) => None,
    };
    let need_env = || {
        env.clone()
            .context("problem-dependent regimes need --means or --env")
    };
    let spec: BoundSpec = match args.regime {
        RegimeArg::Local => minimax_lb_local(args.num_arms, args.horizon, args.epsilon, mode)?,
        RegimeArg::Instantaneous => {
            minimax_lb_instantaneous(args.num_arms, args.horizon, args.epsilon, mode)?
        }
        RegimeArg::Dp => minimax_lb_dp(
            args.num_arms,
            args.horizon,
            args.epsilon,
            args.c,
            args.variant.into(),
        )?,
        RegimeArg::BayesLocal => {
            bayes_minimax_lb_local(args.num_arms, args.horizon, args.epsilon, mode)?
        }
        RegimeArg::BayesInstantaneous => {
            bayes_minimax_lb_instantaneous(args.num_arms, args.horizon, args.epsilon, mode)?
        }
        RegimeArg::BayesDp => bayes_minimax_lb_dp(
            args.num_arms,
            args.horizon,
            args.epsilon,
            args.c,
            args.variant.into(),
        )?,
        RegimeArg::NonprivateMinimax => minimax_lb_nonprivate(args.num_arms, args.horizon, mode)?,
        RegimeArg::LocalProblemDep => problem_dependent_lb_local(&need_env()?, args.epsilon)?,
        RegimeArg::NonprivateProblemDep => problem_dependent_lb_nonprivate(&need_env()?)?,
        RegimeArg::LocalThreshold => {
            let value = local_threshold(args.num_arms, args.epsilon)?;
            println!("{}", BoundSpec::CSV_HEADER);
            println!(
                "local-threshold,{},{},{},{},,{}",
                args.num_arms, args.horizon, args.epsilon, args.c, value
            );
            return Ok(ExitCode::SUCCESS);
        }
        RegimeArg::DpThreshold => {
            let value = dp_threshold(args.num_arms, args.epsilon, args.c)?;
            println!("{}", BoundSpec::CSV_HEADER);
            println!(
                "dp-threshold,{},{},{},{},,{}",
                args.num_arms, args.horizon, args.epsilon, args.c, value
            );
            return Ok(ExitCode::SUCCESS);
        }
    };
    println!("{}", BoundSpec::CSV_HEADER);
    println!("{}", spec.csv_row());
    for warning in &spec.warnings {
        eprintln!("warning: {warning}");
    }
    Ok(ExitCode::SUCCESS)
}

fn parse_mechanism(args: &AuditArgs) -> Result<Mechanism> {
    let kind = args
        .mechanism
        .as_deref()
        .context("local-mechanism audits need --mechanism")?;
    match kind {
        "identity" => Ok(Mechanism::identity()),
        "rr" => Ok(Mechanism::randomized_response(
            args.epsilon.context("--mechanism rr needs --epsilon")?,
        )?),
        "laplace" => Ok(Mechanism::laplace(
            args.epsilon
                .context("--mechanism laplace needs --epsilon")?,
            args.sensitivity,
        )?),
        other => serde_json::from_str(&json_or_file(other)?)
            .with_context(|| format!("unknown mechanism {other}")),
    }
}

fn audit(args: AuditArgs) -> Result<ExitCode> {
    let alphabet = parse_floats(&args.alphabet)?;
    let report = match args.definition {
        DefinitionArg::LocalMechanism => {
            let mechanism = parse_mechanism(&args)?;
            audit_local_mechanism(&mechanism, &alphabet)?
        }
        DefinitionArg::PanDp => {
            let policy = parse_policy(args.policy.as_deref().context("audit needs --policy")?)?;
            audit_pan_dp(&policy, args.num_arms, &alphabet, args.horizon, args.cap)?
        }
        DefinitionArg::InstantaneousDp => {
            let policy = parse_policy(args.policy.as_deref().context("audit needs --policy")?)?;
            audit_instantaneous_dp(&policy, args.num_arms, &alphabet, args.horizon, args.cap)?
        }
        DefinitionArg::Environment => {
            let policy = parse_policy(args.policy.as_deref().context("audit needs --policy")?)?;
            let env1 = parse_environment(args.env1.as_deref().context("needs --env1")?)?;
            let env2 = parse_environment(args.env2.as_deref().context("needs --env2")?)?;
            audit_environment_privacy(&policy, &env1, &env2, args.horizon, args.rho, args.cap)?
        }
    };
    println!("{}", serde_json::to_string_pretty(&report)?);
    if let Some(claimed) = report.epsilon_claimed {
        if report.epsilon_measured > claimed + 1e-9 {
            eprintln!(
                "FAIL measured epsilon {} exceeds claimed {claimed}",
                report.epsilon_measured
            );
            return Ok(ExitCode::from(1));
        }
        println!(
            "PASS measured epsilon {} within claimed {claimed}",
            report.epsilon_measured
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn report_outcome(outcome: &SweepOutcome) -> ExitCode {
    println!("{}", outcome.summary_line());
    if outcome.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn verify_lemma(args: VerifyLemmaArgs) -> Result<ExitCode> {
    let outcome = match args.lemma.as_str() {
        "3" => kl_decomposition_sweep(
            &[args.num_arms],
            &[args.horizon],
            &args.betas,
            args.grid,
            args.cap,
            args.tolerance,
        )?,
        "4" => local_private_sweep(
            &[args.num_arms],
            &[args.horizon],
            &args.betas,
            &args.epsilons,
            args.grid,
            args.cap,
            args.tolerance,
        )?,
        "6" => neighbour_ratio_sweep(
            &args.ratio_bounds,
            args.instances,
            8,
            args.seed,
            args.tolerance,
        )?,
        "equivalence" => equivalence_sweep(
            20,
            args.num_arms,
            args.horizon.min(2),
            args.seed,
            args.cap,
            args.tolerance,
        )?,
        "composition" => composition_sweep(args.cap, args.tolerance)?,
        "pinsker" => pinsker_sweep(args.instances, args.seed)?,
        "bretagnolle-huber" => bretagnolle_huber_sweep(args.instances, args.seed)?,
        other => bail!("unknown lemma id {other}"),
    };
    Ok(report_outcome(&outcome))
}

fn sweep(args: SweepArgs) -> Result<ExitCode> {
    let outcomes = full_sweep(args.cap)?;
    let mut failed = false;
    for outcome in &outcomes {
        println!("{}", outcome.summary_line());
        failed |= !outcome.passed();
    }
    if failed {
        println!("FAIL: at least one sweep failed");
        Ok(ExitCode::from(1))
    } else {
        println!("PASS: all sweeps passed");
        Ok(ExitCode::SUCCESS)
    }
}
