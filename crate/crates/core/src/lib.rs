//! Stochastic multi-armed bandits whose arms are strategic agents.
//!
//! Each arm may add a manipulation `alpha` to its realized reward, subject
//! to a total budget `sum |alpha| <= B`. The principal runs UCB,
//! epsilon-greedy or Thompson sampling on the manipulated rewards while
//! regret is measured against the true means.
//!
//! ```
//! use strategic_bandits::{run_trials, ArmSpec, GameConfig, PrincipalKind, StrategyKind};
//!
//! let arms = vec![
//!     ArmSpec::gaussian(5.0, 1.0, 10.0),
//!     ArmSpec::gaussian(8.0, 1.0, 10.0),
//!     ArmSpec::gaussian(10.0, 1.0, 0.0),
//! ];
//! let mut config = GameConfig::uniform(arms, 1_000, PrincipalKind::Ucb, StrategyKind::Lsi);
//! config.trials = 4;
//! let aggregate = run_trials(&config).unwrap();
//! assert!(aggregate.final_mean_regret() > 0.0);
//! ```

pub mod analysis;
pub mod cli;
pub mod engine;
pub mod error;
pub mod game;
pub mod principals;
pub mod strategies;

pub use analysis::{check, Bound, BoundReport, Direction, Verdict};
pub use engine::{dominance_check, run_coupled_pair, run_episode, run_trials, run_trials_with_workers, DominanceSummary, TrialAggregate};
pub use error::{ConfigError, Error, Result};
pub use game::{build_tape, checkpoints, gap_profile, regret_of, ArmSpec, EpisodeResult, GameConfig, RewardDistribution, RewardTape};
pub use principals::{ConfidenceWidth, PrincipalKind};
pub use strategies::StrategyKind;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/game.md")]
    mod game {}
    #[doc = include_str!("../../../book/src/strategies.md")]
    mod strategies {}
    #[doc = include_str!("../../../book/src/principals.md")]
    mod principals {}
    #[doc = include_str!("../../../book/src/trials.md")]
    mod trials {}
    #[doc = include_str!("../../../book/src/coupling.md")]
    mod coupling {}
    #[doc = include_str!("../../../book/src/bounds.md")]
    mod bounds {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
