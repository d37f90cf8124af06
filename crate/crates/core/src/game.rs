//! Domain types shared by every other module: arm specifications, the game
//! configuration, pre-drawn reward tapes, pull records and pseudo-regret.
//!
//! Arms are indexed from zero throughout the library. Rendered output (CSV
//! columns, CLI flags, reports) uses one-based arm numbers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, Normal};

use crate::error::{ConfigError, Error, Result};
use crate::principals::{ConfidenceWidth, PrincipalKind};
use crate::strategies::StrategyKind;

/// Absolute slack used for every budget comparison.
pub const BUDGET_TOLERANCE: f64 = 1e-9;

/// True reward distribution of one arm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RewardDistribution {
    /// `sigma = 0` is a point mass at `mean`.
    Gaussian { mean: f64, sigma: f64 },
    Beta { a: f64, b: f64 },
}

impl RewardDistribution {
    pub fn mean(&self) -> f64 {
        match *self {
            RewardDistribution::Gaussian { mean, .. } => mean,
            RewardDistribution::Beta { a, b } => a / (a + b),
        }
    }

    /// Sub-Gaussian scale: the Gaussian's own sigma, and 1/2 for anything
    /// supported on [0, 1].
    pub fn sub_gaussian_sigma(&self) -> f64 {
        match *self {
            RewardDistribution::Gaussian { sigma, .. } => sigma,
            RewardDistribution::Beta { .. } => 0.5,
        }
    }

    /// Whether every draw is guaranteed to land in [0, 1].
    pub fn supported_on_unit_interval(&self) -> bool {
        match *self {
            RewardDistribution::Gaussian { mean, sigma } => sigma == 0.0 && (0.0..=1.0).contains(&mean),
            RewardDistribution::Beta { .. } => true,
        }
    }

    fn validate(&self, arm: usize) -> Result<(), ConfigError> {
        let bad = |reason: String| ConfigError::InvalidDistribution { arm, reason };
        match *self {
            RewardDistribution::Gaussian { mean, sigma } => {
                if !mean.is_finite() {
                    return Err(bad(format!("mean must be finite, got {mean}")));
                }
                if !(sigma.is_finite() && sigma >= 0.0) {
                    return Err(bad(format!("sigma must be finite and >= 0, got {sigma}")));
                }
            }
            RewardDistribution::Beta { a, b } => {
                if !(a.is_finite() && a > 0.0 && b.is_finite() && b > 0.0) {
                    return Err(bad(format!("beta parameters must be > 0, got ({a}, {b})")));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmSpec {
    pub distribution: RewardDistribution,
    /// Cap on the total absolute manipulation over the whole horizon.
    pub budget: f64,
}

impl ArmSpec {
    pub fn gaussian(mean: f64, sigma: f64, budget: f64) -> Self {
        Self { distribution: RewardDistribution::Gaussian { mean, sigma }, budget }
    }

    pub fn beta(a: f64, b: f64, budget: f64) -> Self {
        Self { distribution: RewardDistribution::Beta { a, b }, budget }
    }

    pub fn mean(&self) -> f64 {
        self.distribution.mean()
    }
}

/// Full description of one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct GameConfig {
    pub arms: Vec<ArmSpec>,
    pub horizon: usize,
    pub principal: PrincipalKind,
    pub width: ConfidenceWidth,
    /// One strategy per arm, same order as `arms`.
    pub strategies: Vec<StrategyKind>,
    pub trials: usize,
    pub master_seed: u64,
    /// Rewards live in [0, 1] and observed rewards are capped at 1.
    pub bounded_rewards: bool,
}

impl GameConfig {
    /// A config with every arm using `strategy`, one trial and seed 0.
    pub fn uniform(arms: Vec<ArmSpec>, horizon: usize, principal: PrincipalKind, strategy: StrategyKind) -> Self {
        let strategies = vec![strategy; arms.len()];
        Self {
            arms,
            horizon,
            principal,
            width: ConfidenceWidth::default(),
            strategies,
            trials: 1,
            master_seed: 0,
            bounded_rewards: false,
        }
    }

    pub fn num_arms(&self) -> usize {
        self.arms.len()
    }

    pub fn means(&self) -> Vec<f64> {
        self.arms.iter().map(ArmSpec::mean).collect()
    }

    pub fn budgets(&self) -> Vec<f64> {
        self.arms.iter().map(|a| a.budget).collect()
    }

    /// The sigma the principal uses for confidence widths: the largest
    /// sub-Gaussian scale among the arms.
    pub fn sigma(&self) -> f64 {
        self.arms.iter().map(|a| a.distribution.sub_gaussian_sigma()).fold(0.0, f64::max)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let k = self.arms.len();
        if k < 2 {
            return Err(ConfigError::TooFewArms(k));
        }
        if self.horizon < k {
            return Err(ConfigError::HorizonTooShort { horizon: self.horizon, arms: k });
        }
        if self.trials == 0 {
            return Err(ConfigError::ZeroTrials);
        }
        if self.strategies.len() != k {
            return Err(ConfigError::StrategyCount { got: self.strategies.len(), arms: k });
        }
        self.principal.validate()?;
        for (i, arm) in self.arms.iter().enumerate() {
            arm.distribution.validate(i)?;
            if !(arm.budget.is_finite() && arm.budget >= 0.0) {
                return Err(ConfigError::InvalidBudget { arm: i, budget: arm.budget });
            }
            if self.bounded_rewards && !arm.distribution.supported_on_unit_interval() {
                return Err(ConfigError::UnboundedSupport { arm: i });
            }
        }
        for (i, strategy) in self.strategies.iter().enumerate() {
            strategy.validate().map_err(|_| ConfigError::InvalidStrategy(strategy.to_string()))?;
            if matches!(strategy, StrategyKind::Lsibr) && !self.bounded_rewards {
                return Err(ConfigError::LsibrRequiresBounded { arm: i });
            }
        }
        gap_profile(self)?;
        Ok(())
    }
}

/// Optimal arm and the per-arm mean gaps.
#[derive(Debug, Clone, PartialEq)]
pub struct GapProfile {
    pub optimal: usize,
    pub gaps: Vec<f64>,
    pub min_gap: f64,
}

/// Locates the unique best arm and the gaps to it.
pub fn gap_profile(config: &GameConfig) -> Result<GapProfile, ConfigError> {
    let means = config.means();
    let best = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let maximizers: Vec<usize> = (0..means.len()).filter(|&i| means[i] == best).collect();
    if maximizers.len() != 1 {
        return Err(ConfigError::NonUniqueOptimum { arms: maximizers.iter().map(|i| i + 1).collect() });
    }
    let optimal = maximizers[0];
    let gaps: Vec<f64> = means.iter().map(|m| best - m).collect();
    let min_gap = gaps
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != optimal)
        .map(|(_, &g)| g)
        .fold(f64::INFINITY, f64::min);
    Ok(GapProfile { optimal, gaps, min_gap })
}

/// Pre-drawn true rewards: `entries[k][s]` is what arm `k` pays on its
/// `(s+1)`-th pull in every episode replayed against this tape.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardTape {
    entries: Vec<Vec<f64>>,
    seed: u64,
}

impl RewardTape {
    /// Wraps explicit rewards. Every arm needs at least `horizon` entries to
    /// be replayed against a config with that horizon.
    pub fn from_entries(entries: Vec<Vec<f64>>, seed: u64) -> Self {
        Self { entries, seed }
    }

    pub fn reward(&self, arm: usize, ordinal: usize) -> f64 {
        self.entries[arm][ordinal]
    }

    pub fn arm(&self, arm: usize) -> &[f64] {
        &self.entries[arm]
    }

    pub fn num_arms(&self) -> usize {
        self.entries.len()
    }

    pub fn len(&self) -> usize {
        self.entries.iter().map(Vec::len).min().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// Draws a K x T reward tape. Arm `k` uses ChaCha8 stream `k` of `seed`, so
/// its column depends only on its own distribution and the seed.
pub fn build_tape(config: &GameConfig, seed: u64) -> Result<RewardTape> {
    config.validate()?;
    let horizon = config.horizon;
    let entries = config
        .arms
        .iter()
        .enumerate()
        .map(|(k, arm)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            draw_column(&arm.distribution, horizon, &mut rng)
        })
        .collect();
    Ok(RewardTape { entries, seed })
}

fn draw_column(distribution: &RewardDistribution, len: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    match *distribution {
        RewardDistribution::Gaussian { mean, sigma: 0.0 } => vec![mean; len],
        RewardDistribution::Gaussian { mean, sigma } => {
            let normal = Normal::new(mean, sigma).expect("validated sigma");
            (0..len).map(|_| normal.sample(rng)).collect()
        }
        RewardDistribution::Beta { a, b } => {
            let beta = Beta::new(a, b).expect("validated beta parameters");
            (0..len).map(|_| beta.sample(rng)).collect()
        }
    }
}

/// One round of play.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PullRecord {
    /// 1-based round.
    pub t: usize,
    pub arm: usize,
    pub true_reward: f64,
    pub manipulation: f64,
    /// Always `true_reward + manipulation`.
    pub observed_reward: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeResult {
    pub records: Vec<PullRecord>,
    pub pull_counts: Vec<u64>,
    /// Per arm, the sum of |manipulation| over the episode.
    pub budget_spent: Vec<f64>,
    /// `(t, cumulative pseudo-regret after round t)` on the checkpoint grid.
    pub regret_trajectory: Vec<(usize, f64)>,
}

impl EpisodeResult {
    /// Arm sequence `I_1, ..., I_T`.
    pub fn arm_sequence(&self) -> Vec<usize> {
        self.records.iter().map(|r| r.arm).collect()
    }

    pub fn final_regret(&self) -> f64 {
        self.regret_trajectory.last().map_or(0.0, |&(_, r)| r)
    }
}

/// Pseudo-regret `sum_t gap[I_t]` of an episode.
pub fn regret_of(episode: &EpisodeResult, config: &GameConfig) -> Result<f64> {
    let profile = gap_profile(config)?;
    let k = profile.gaps.len();
    if episode.pull_counts.len() != k {
        return Err(Error::Mismatch(format!("{} pull counts for {k} arms", episode.pull_counts.len())));
    }
    episode.records.iter().try_fold(0.0, |acc, r| match profile.gaps.get(r.arm) {
        Some(gap) => Ok(acc + gap),
        None => Err(Error::ArmOutOfRange { arm: r.arm, arms: k }),
    })
}

/// Rounds at which regret is sampled: `{1, 2, 5} x 10^j` up to `horizon`,
/// plus `horizon` itself.
pub fn checkpoints(horizon: usize) -> Vec<usize> {
    let mut grid = Vec::new();
    let mut scale = 1usize;
    'outer: loop {
        for m in [1, 2, 5] {
            let t = m * scale;
            if t > horizon {
                break 'outer;
            }
            grid.push(t);
        }
        scale = match scale.checked_mul(10) {
            Some(s) => s,
            None => break,
        };
    }
    if grid.last() != Some(&horizon) {
        grid.push(horizon);
    }
    grid
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::principals::PrincipalKind;

    fn fig1_arms(budget: f64) -> Vec<ArmSpec> {
        vec![ArmSpec::gaussian(5.0, 1.0, budget), ArmSpec::gaussian(8.0, 1.0, budget), ArmSpec::gaussian(10.0, 1.0, 0.0)]
    }

    fn config(arms: Vec<ArmSpec>, horizon: usize) -> GameConfig {
        GameConfig::uniform(arms, horizon, PrincipalKind::Ucb, StrategyKind::Zero)
    }

    #[test]
    fn degenerate_gaussian_tape_is_constant() {
        let cfg = config(vec![ArmSpec::gaussian(5.0, 0.0, 0.0), ArmSpec::gaussian(6.0, 0.0, 0.0)], 3);
        let tape = build_tape(&cfg, 17).unwrap();
        assert_eq!(tape.arm(0), &[5.0, 5.0, 5.0]);
    }

    #[test]
    fn tape_is_deterministic() {
        let cfg = config(fig1_arms(0.0), 500);
        assert_eq!(build_tape(&cfg, 99).unwrap(), build_tape(&cfg, 99).unwrap());
        assert_ne!(build_tape(&cfg, 99).unwrap(), build_tape(&cfg, 100).unwrap());
    }

    #[test]
    fn arm_column_ignores_other_arms() {
        let a = config(fig1_arms(0.0), 200);
        let mut b = a.clone();
        b.arms[0] = ArmSpec::gaussian(1.0, 3.0, 0.0);
        let (ta, tb) = (build_tape(&a, 5).unwrap(), build_tape(&b, 5).unwrap());
        assert_eq!(ta.arm(1), tb.arm(1));
        assert_eq!(ta.arm(2), tb.arm(2));
    }

    #[test]
    fn gaussian_tape_mean_is_close() {
        let cfg = config(vec![ArmSpec::gaussian(8.0, 1.0, 0.0), ArmSpec::gaussian(9.0, 1.0, 0.0)], 10_000);
        for seed in [0, 1, 2, 3] {
            let tape = build_tape(&cfg, seed).unwrap();
            let mean = tape.arm(0).iter().sum::<f64>() / 10_000.0;
            assert!((mean - 8.0).abs() < 0.05, "seed {seed}: {mean}");
        }
    }

    #[test]
    fn beta_tape_in_unit_interval() {
        let mut cfg = config(vec![ArmSpec::beta(1.0, 1.0, 0.0), ArmSpec::beta(3.0, 1.0, 0.0)], 2000);
        cfg.bounded_rewards = true;
        let tape = build_tape(&cfg, 3).unwrap();
        assert!(tape.arm(0).iter().chain(tape.arm(1)).all(|r| (0.0..=1.0).contains(r)));
        let mean = tape.arm(1).iter().sum::<f64>() / 2000.0;
        assert!((mean - 0.75).abs() < 0.02);
    }

    #[test]
    fn gap_profile_fig1() {
        let p = gap_profile(&config(fig1_arms(0.0), 10)).unwrap();
        assert_eq!(p.optimal, 2);
        assert_eq!(p.gaps, vec![5.0, 2.0, 0.0]);
        assert_eq!(p.min_gap, 2.0);
    }

    #[test]
    fn gap_profile_two_arms() {
        let cfg = config(vec![ArmSpec::gaussian(0.0, 1.0, 0.0), ArmSpec::gaussian(1.0, 1.0, 0.0)], 4);
        let p = gap_profile(&cfg).unwrap();
        assert_eq!((p.optimal, p.gaps.clone(), p.min_gap), (1, vec![1.0, 0.0], 1.0));
    }

    #[test]
    fn tied_optimum_is_rejected() {
        let cfg = config(vec![ArmSpec::gaussian(7.0, 1.0, 0.0), ArmSpec::gaussian(7.0, 1.0, 0.0)], 4);
        assert!(matches!(gap_profile(&cfg), Err(ConfigError::NonUniqueOptimum { .. })));
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn validation_errors() {
        let mut cfg = config(fig1_arms(0.0), 2);
        assert_eq!(cfg.validate(), Err(ConfigError::HorizonTooShort { horizon: 2, arms: 3 }));
        cfg.horizon = 10;
        cfg.arms[0].budget = -1.0;
        assert!(matches!(cfg.validate(), Err(ConfigError::InvalidBudget { arm: 0, .. })));
        cfg.arms[0].budget = 0.0;
        cfg.bounded_rewards = true;
        assert_eq!(cfg.validate(), Err(ConfigError::UnboundedSupport { arm: 0 }));
        cfg.bounded_rewards = false;
        cfg.strategies[1] = StrategyKind::Lsibr;
        assert_eq!(cfg.validate(), Err(ConfigError::LsibrRequiresBounded { arm: 1 }));
        assert!(config(vec![ArmSpec::gaussian(1.0, 1.0, 0.0)], 5).validate().is_err());
    }

    fn episode_from_arms(arms: &[usize], k: usize) -> EpisodeResult {
        let mut pull_counts = vec![0; k];
        let records = arms
            .iter()
            .enumerate()
            .map(|(i, &arm)| {
                pull_counts[arm] += 1;
                PullRecord { t: i + 1, arm, true_reward: 0.0, manipulation: 0.0, observed_reward: 0.0 }
            })
            .collect();
        EpisodeResult { records, pull_counts, budget_spent: vec![0.0; k], regret_trajectory: vec![] }
    }

    #[test]
    fn regret_of_hand_sums() {
        let cfg = config(fig1_arms(0.0), 4);
        assert_eq!(regret_of(&episode_from_arms(&[2, 2, 2, 2], 3), &cfg).unwrap(), 0.0);
        assert_eq!(regret_of(&episode_from_arms(&[0, 1, 2, 2], 3), &cfg).unwrap(), 7.0);
        let seq = [0, 0, 0, 1, 1, 2, 0, 1];
        assert_eq!(regret_of(&episode_from_arms(&seq, 3), &cfg).unwrap(), 5.0 * 4.0 + 2.0 * 3.0);
        assert!(regret_of(&episode_from_arms(&[0, 1], 2), &cfg).is_err());
    }

    #[test]
    fn checkpoint_grid() {
        assert_eq!(checkpoints(10_000), vec![1, 2, 5, 10, 20, 50, 100, 200, 500, 1000, 2000, 5000, 10_000]);
        assert_eq!(checkpoints(30), vec![1, 2, 5, 10, 20, 30]);
        assert_eq!(checkpoints(1), vec![1]);
    }
}
