//! Privacy-preserving multi-armed bandits, end to end: finite stochastic
//! environments, local and instantaneous privacy mechanisms, auditable
//! policies, KL-decomposition verifiers, closed-form regret lower bounds, and
//! an exact enumeration-based privacy auditor.
//!
//! ```
//! use privbandit::env::run_episode;
//! use privbandit::mechanism::Mechanism;
//! use privbandit::policy::{ldp_pipeline, Policy};
//! use privbandit::Environment;
//! use rand_chacha::rand_core::SeedableRng;
//!
//! let env = Environment::bernoulli(&[0.7, 0.3])?;
//! let mechanism = Mechanism::randomized_response(1.0)?;
//! let policy = ldp_pipeline(&Policy::ucb1(1.0)?, &mechanism)?;
//! let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
//! let episode = run_episode(&policy, &env, 1_000, &mut rng)?;
//! assert_eq!(episode.history.len(), 1_000);
//! # Ok::<(), privbandit::Error>(())
//! ```

pub mod audit;
pub mod bounds;
pub mod decomposition;
pub mod divergence;
pub mod env;
pub mod error;
pub mod experiment;
pub mod mechanism;
pub mod policy;
pub mod sweeps;

pub use audit::{AuditDefinition, AuditReport, AuditWitness};
pub use bounds::{BoundSpec, ConstantMode, DpVariant, HardInstancePair, Regime};
pub use decomposition::{DecompositionReport, Verdict};
pub use divergence::FiniteDistribution;
pub use env::{Environment, Episode, GeneratedOutcomes, History, HistoryProb, RewardDistribution};
pub use error::{Error, Result};
pub use experiment::{ExperimentConfig, RegretCurve};
pub use mechanism::{CorruptedDistribution, Mechanism};
pub use policy::{EpsilonSchedule, Policy, PolicyState, PrivacyLedger};
