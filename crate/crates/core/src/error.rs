//! Shared error type for the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("arm index {arm} out of range for {arms} arms")]
    ArmOutOfRange { arm: usize, arms: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("enumeration requires {required} states, exceeding the cap of {cap}")]
    EnumerationBudget { required: u128, cap: u128 },

    #[error("policy kind `{0}` does not expose exact action distributions")]
    NotAuditable(String),

    #[error("mechanism requires binary {{0, 1}} support, got {0}")]
    NonBinarySupport(String),

    #[error("history step {step} lacks the privatized reward required by the policy")]
    MissingPrivatizedReward { step: usize },

    #[error("environment distance is zero but history distributions differ; ratio undefined")]
    UndefinedRatio,

    #[error("degenerate instance: {0}")]
    DegenerateInstance(String),

    #[error("infeasible horizon: required gap {delta} exceeds {limit}")]
    InfeasibleHorizon { delta: f64, limit: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
