use thiserror::Error;

/// Reasons a game configuration is rejected.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("a game needs at least two arms, got {0}")]
    TooFewArms(usize),
    #[error("horizon {horizon} is shorter than the number of arms {arms}")]
    HorizonTooShort { horizon: usize, arms: usize },
    #[error("the optimal arm is not unique: arms {arms:?} share the largest mean")]
    NonUniqueOptimum { arms: Vec<usize> },
    #[error("arm {arm}: budget must be finite and non-negative, got {budget}")]
    InvalidBudget { arm: usize, budget: f64 },
    #[error("arm {arm}: {reason}")]
    InvalidDistribution { arm: usize, reason: String },
    #[error("arm {arm}: bounded rewards require support within [0, 1]")]
    UnboundedSupport { arm: usize },
    #[error("arm {arm}: LSIBR requires bounded rewards")]
    LsibrRequiresBounded { arm: usize },
    #[error("{got} strategies given for {arms} arms")]
    StrategyCount { got: usize, arms: usize },
    #[error("invalid strategy descriptor `{0}`")]
    InvalidStrategy(String),
    #[error("invalid principal: {0}")]
    InvalidPrincipal(String),
    #[error("trials must be at least 1")]
    ZeroTrials,
    #[error("missing required key `{0}`")]
    MissingKey(String),
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("malformed configuration: {0}")]
    Malformed(String),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("round {t} is past the horizon {horizon}")]
    RoundOutOfRange { t: usize, horizon: usize },
    #[error("arm {0} is the optimal arm; this bound covers sub-optimal arms only")]
    OptimalArm(usize),
    #[error("arm index {arm} out of range for {arms} arms")]
    ArmOutOfRange { arm: usize, arms: usize },
    #[error("bound precondition not met: {0}")]
    Precondition(String),
    #[error("episode does not match configuration: {0}")]
    Mismatch(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
