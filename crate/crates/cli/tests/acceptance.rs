//! Acceptance suite: every release criterion as one test, each printing a
//! single PASS line with its measured margin. Run with
//! `cargo test -p privbandit-cli --test acceptance -- --nocapture` to see
//! the lines as they go by.

use std::process::Command;
use std::time::{Duration, Instant};

use privbandit::audit::audit_pan_dp;
use privbandit::bounds::{minimax_lb_local, ConstantMode, HardInstanceRegime};
use privbandit::env::DEFAULT_ENUMERATION_CAP;
use privbandit::experiment::{run_experiment, EnvironmentSpec, ExperimentConfig};
use privbandit::mechanism::Mechanism;
use privbandit::policy::{ldp_pipeline, Policy};
use privbandit::sweeps::{
    bound_monotonicity_sweep, bound_scaling_sweep, bretagnolle_huber_sweep,
    channel_exactness_sweep, composition_sweep, equivalence_sweep, kl_decomposition_sweep,
    local_private_sweep, neighbour_ratio_sweep, pinsker_sweep,
};

const CAP: u128 = DEFAULT_ENUMERATION_CAP;

fn assert_within_budget(name: &str, elapsed: Duration, budget: Duration) {
    assert!(
        elapsed <= budget,
        "{name} exceeded its runtime budget: {elapsed:?} > {budget:?}"
    );
}

#[test]
fn criterion_01_kl_decomposition_equality_grid() {
    let start = Instant::now();
    let outcome =
        kl_decomposition_sweep(&[2, 3], &[1, 2, 3], &[0.0, 1.0, 5.0], 0.25, CAP, 1e-9).unwrap();
    let elapsed = start.elapsed();
    assert!(outcome.passed(), "{}", outcome.summary_line());
    assert!(outcome.max_abs_slack <= 1e-9, "{}", outcome.max_abs_slack);
    assert_within_budget("criterion 1", elapsed, Duration::from_secs(60));
    println!(
        "ACCEPTANCE 1 kl-decomposition equality: PASS ({} cells, max |slack| {:.3e}, {:.2?})",
        outcome.cells, outcome.max_abs_slack, elapsed
    );
}

#[test]
fn criterion_02_local_private_inequality_grid() {
    let start = Instant::now();
    let outcome = local_private_sweep(
        &[2, 3],
        &[1, 2, 3],
        &[0.0, 1.0, 5.0],
        &[0.1, 0.5, 1.0, 2.0],
        0.25,
        CAP,
        1e-9,
    )
    .unwrap();
    let elapsed = start.elapsed();
    assert!(outcome.passed(), "{}", outcome.summary_line());
    // The proof predicts strictly positive slack on distinct environments.
    assert!(outcome.min_slack > 0.0, "min slack {}", outcome.min_slack);
    assert_within_budget("criterion 2", elapsed, Duration::from_secs(120));
    println!(
        "ACCEPTANCE 2 local-private inequality: PASS ({} cells, min slack {:.3e}, {:.2?})",
        outcome.cells, outcome.min_slack, elapsed
    );
}

#[test]
fn criterion_03_neighbour_ratio_inequality() {
    let start = Instant::now();
    let outcome = neighbour_ratio_sweep(&[0.1, 0.5, 1.0], 1000, 8, 0x6e1d, 1e-9).unwrap();
    let elapsed = start.elapsed();
    assert!(outcome.passed(), "{}", outcome.summary_line());
    assert_eq!(outcome.cells, 3000);
    assert_within_budget("criterion 3", elapsed, Duration::from_secs(10));
    println!(
        "ACCEPTANCE 3 neighbour-ratio inequality: PASS (3000 instances, min slack {:.3e}, {:.2?})",
        outcome.min_slack, elapsed
    );
}

#[test]
fn criterion_04_auditor_exactness() {
    let outcome = channel_exactness_sweep(&[0.1, 0.5, 1.0, 3.0f64.ln(), 2.0], 1e-12).unwrap();
    assert!(outcome.passed(), "{}", outcome.summary_line());

    let uniform = audit_pan_dp(&Policy::uniform(), 2, &[0.0, 1.0], 3, CAP).unwrap();
    assert_eq!(uniform.epsilon_measured, 0.0);
    println!(
        "ACCEPTANCE 4 auditor exactness: PASS (max channel deviation {:.3e}, uniform policy 0)",
        outcome.max_abs_slack
    );
}

#[test]
fn criterion_05_outcome_reward_equivalence() {
    let outcome = equivalence_sweep(20, 2, 2, 0x9a7e, CAP, 1e-9).unwrap();
    assert!(outcome.passed(), "{}", outcome.summary_line());
    assert_eq!(outcome.cells, 20);
    println!(
        "ACCEPTANCE 5 outcome/reward equivalence: PASS (20 policies, max deviation {:.3e})",
        outcome.max_abs_slack
    );
}

#[test]
fn criterion_06_composition_relations() {
    let outcome = composition_sweep(CAP, 1e-9).unwrap();
    assert!(outcome.passed(), "{}", outcome.summary_line());
    println!(
        "ACCEPTANCE 6 pan/instantaneous composition: PASS ({} audited policies)",
        outcome.cells
    );
}

fn bounds_value(args: &[&str]) -> f64 {
    let output = Command::new(env!("CARGO_BIN_EXE_privbandit"))
        .arg("bounds")
        .args(args)
        .output()
        .expect("bounds subcommand runs");
    assert!(
        output.status.success(),
        "bounds {args:?} failed: {output:?}"
    );
    let stdout = String::from_utf8(output.stdout).unwrap();
    let row = stdout.lines().nth(1).expect("CSV row after header");
    row.split(',').next_back().unwrap().parse().unwrap()
}

#[test]
fn criterion_07_bound_formula_worked_values() {
    let cases: Vec<(&str, Vec<&str>, f64)> = vec![
        (
            "local rate",
            vec![
                "--regime",
                "local",
                "--K",
                "2",
                "--T",
                "10000",
                "--epsilon",
                "1",
                "--constant",
                "rate-only",
            ],
            29.0988,
        ),
        (
            "local proof-constant",
            vec![
                "--regime",
                "local",
                "--K",
                "2",
                "--T",
                "10000",
                "--epsilon",
                "1",
                "--constant",
                "proof-constant",
            ],
            0.13324,
        ),
        (
            "instantaneous rate",
            vec![
                "--regime",
                "instantaneous",
                "--K",
                "2",
                "--T",
                "10000",
                "--epsilon",
                "1",
                "--constant",
                "rate-only",
            ],
            27.975,
        ),
        (
            "dp appendix",
            vec![
                "--regime",
                "dp",
                "--K",
                "2",
                "--T",
                "10000",
                "--epsilon",
                "1",
                "--c",
                "0",
            ],
            0.36638,
        ),
        (
            "problem-dependent local",
            vec![
                "--regime",
                "local-problem-dep",
                "--means",
                "0.75,0.5",
                "--epsilon",
                "1",
            ],
            0.073582,
        ),
        (
            "threshold g(2,1)",
            vec!["--regime", "local-threshold", "--K", "2", "--epsilon", "1"],
            0.084670,
        ),
    ];
    for (name, args, expected) in cases {
        let got = bounds_value(&args);
        let relative = (got - expected).abs() / expected;
        assert!(
            relative < 1e-4,
            "{name}: got {got}, expected {expected} (relative {relative:.2e})"
        );
    }
    println!("ACCEPTANCE 7 bound formulas: PASS (6 worked values to 4 significant figures)");
}

#[test]
fn criterion_08_hard_instance_consistency() {
    let start = Instant::now();
    let bound = minimax_lb_local(2, 20_000, 1.0, ConstantMode::ProofConstant)
        .unwrap()
        .value;
    let rr = Mechanism::randomized_response(1.0).unwrap();
    let policies: Vec<(&str, Policy)> = vec![
        ("ucb1", Policy::ucb1(1.0).unwrap()),
        (
            "ldp-ucb",
            ldp_pipeline(&Policy::ucb1(1.0).unwrap(), &rr).unwrap(),
        ),
        (
            "ldp-softmax",
            ldp_pipeline(&Policy::softmax(5.0).unwrap(), &rr).unwrap(),
        ),
    ];
    let mut lines = Vec::new();
    for (name, policy) in policies {
        let config = ExperimentConfig {
            policy,
            environment: EnvironmentSpec::HardInstance {
                regime: HardInstanceRegime::Local,
                num_arms: 2,
                epsilon: 1.0,
                lipschitz_budget: 0.0,
            },
            horizon: 20_000,
            replications: 200,
            seed: 0x8a5e,
            output: None,
            grid_points: 10,
            overlays: Vec::new(),
        };
        let curve = run_experiment(&config).unwrap();
        let regret = curve.max_final_regret();
        assert!(
            regret >= bound,
            "{name}: max-over-pair regret {regret} below the bound {bound}"
        );
        lines.push(format!("{name} {regret:.2}"));
    }
    let elapsed = start.elapsed();
    assert_within_budget("criterion 8", elapsed, Duration::from_secs(300));
    println!(
        "ACCEPTANCE 8 hard-instance consistency: PASS (bound {bound:.5}; max-over-pair regret {}; {:.2?})",
        lines.join(", "),
        elapsed
    );
}

#[test]
fn criterion_09_inequality_sweeps() {
    let pinsker = pinsker_sweep(1000, 0x11a5).unwrap();
    assert!(pinsker.passed(), "{}", pinsker.summary_line());
    assert_eq!(pinsker.cells, 1000);
    let bh = bretagnolle_huber_sweep(1000, 0xb4).unwrap();
    assert!(bh.passed(), "{}", bh.summary_line());
    assert_eq!(bh.cells, 1000);
    println!(
        "ACCEPTANCE 9 inequality sweeps: PASS (Pinsker and Bretagnolle-Huber, 1000 instances each; {})",
        bh.notes.as_deref().unwrap_or_default()
    );
}

#[test]
fn criterion_10_bound_monotonicity_and_scaling() {
    let mono = bound_monotonicity_sweep(2, 10_000).unwrap();
    assert!(mono.passed(), "{}", mono.summary_line());
    let scaling = bound_scaling_sweep(2, 10_000, 1e-9).unwrap();
    assert!(scaling.passed(), "{}", scaling.summary_line());
    println!(
        "ACCEPTANCE 10 monotonicity and scaling: PASS ({} monotone steps, sqrt-T deviation {:.3e})",
        mono.cells, scaling.max_abs_slack
    );
}
