//! Episode execution, multi-trial aggregation and coupled pairs.
//!
//! Two episodes replayed against the same [`RewardTape`] are arm-coupled:
//! the s-th pull of arm k yields the same true reward in both, whatever order
//! the arms end up being pulled in.
//!
//! Trial `j` of a config draws its tape from `derive_seed(master, Tape, j)`
//! and its policy randomness from `derive_seed(master, Policy, j)`. The
//! derivation is a fixed counter scheme, so trial `j` is the same episode no
//! matter how many trials run or how many workers run them.

use log::warn;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::game::{build_tape, checkpoints, gap_profile, EpisodeResult, GameConfig, PullRecord, RewardTape};
use crate::principals::PrincipalState;
use crate::strategies::{StrategyKind, StrategyState};

/// Which independent random stream a derived seed feeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedStream {
    Tape,
    Policy,
}

impl SeedStream {
    /// ASCII of "tape" / "policy", packed big-endian.
    fn tag(self) -> u64 {
        match self {
            SeedStream::Tape => 0x7461_7065,
            SeedStream::Policy => 0x706f_6c69_6379,
        }
    }
}

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// `mix64(mix64(mix64(master) ^ tag) ^ trial)`.
pub fn derive_seed(master: u64, stream: SeedStream, trial: u64) -> u64 {
    mix64(mix64(mix64(master) ^ stream.tag()) ^ trial)
}

/// `(tape_seed, policy_seed)` for trial `trial`.
pub fn trial_seeds(master: u64, trial: u64) -> (u64, u64) {
    (derive_seed(master, SeedStream::Tape, trial), derive_seed(master, SeedStream::Policy, trial))
}

/// Plays one episode of `config` against `tape`.
pub fn run_episode(config: &GameConfig, tape: &RewardTape, policy_seed: u64) -> Result<EpisodeResult> {
    run_with_strategies(config, &config.strategies, tape, policy_seed)
}

fn run_with_strategies(config: &GameConfig, strategies: &[StrategyKind], tape: &RewardTape, policy_seed: u64) -> Result<EpisodeResult> {
    config.validate()?;
    let k = config.num_arms();
    let horizon = config.horizon;
    if tape.num_arms() != k || tape.len() < horizon {
        return Err(Error::Mismatch(format!(
            "tape has {} arms x {} pulls, config needs {k} x {horizon}",
            tape.num_arms(),
            tape.len()
        )));
    }
    let gaps = gap_profile(config)?.gaps;
    let mut principal = PrincipalState::new(
        k,
        horizon,
        config.sigma(),
        config.principal,
        config.width,
        ChaCha8Rng::seed_from_u64(policy_seed),
    );
    let mut arms: Vec<StrategyState> =
        strategies.iter().zip(&config.arms).map(|(s, a)| StrategyState::new(s.clone(), a.budget)).collect();

    let grid = checkpoints(horizon);
    let mut next_checkpoint = grid.iter().peekable();
    let mut regret_trajectory = Vec::with_capacity(grid.len());
    let mut records = Vec::with_capacity(horizon);
    let mut pull_counts = vec![0u64; k];
    let mut budget_spent = vec![0.0; k];
    let mut regret = 0.0;

    for t in 1..=horizon {
        let arm = principal.select()?;
        let true_reward = tape.reward(arm, pull_counts[arm] as usize);
        let mut manipulation = arms[arm].decide(true_reward, config.bounded_rewards)?;
        let mut observed_reward = true_reward + manipulation;
        if config.bounded_rewards && observed_reward > 1.0 {
            warn!("round {t}: arm {} reported {observed_reward} in bounded mode, capping at 1", arm + 1);
            manipulation = 1.0 - true_reward;
            observed_reward = true_reward + manipulation;
        }
        principal.update(arm, observed_reward);
        pull_counts[arm] += 1;
        budget_spent[arm] += manipulation.abs();
        regret += gaps[arm];
        records.push(PullRecord { t, arm, true_reward, manipulation, observed_reward });
        if next_checkpoint.next_if_eq(&&t).is_some() {
            regret_trajectory.push((t, regret));
        }
    }
    Ok(EpisodeResult { records, pull_counts, budget_spent, regret_trajectory })
}

/// Mean and standard deviation over trials at each checkpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialAggregate {
    pub config_id: String,
    pub checkpoints: Vec<usize>,
    pub mean_regret: Vec<f64>,
    pub std_regret: Vec<f64>,
    pub mean_pull_counts: Vec<f64>,
    pub std_pull_counts: Vec<f64>,
    pub trials: usize,
}

impl TrialAggregate {
    pub fn final_mean_regret(&self) -> f64 {
        *self.mean_regret.last().expect("at least one checkpoint")
    }

    pub fn final_std_regret(&self) -> f64 {
        *self.std_regret.last().expect("at least one checkpoint")
    }

    /// Mean regret at checkpoint `t`, if `t` is on the grid.
    pub fn mean_regret_at(&self, t: usize) -> Option<f64> {
        self.checkpoints.iter().position(|&c| c == t).map(|i| self.mean_regret[i])
    }
}

/// Sample mean and (n-1)-denominator standard deviation; the deviation of a
/// single sample is 0.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

struct TrialSummary {
    regret: Vec<f64>,
    pulls: Vec<f64>,
}

fn run_trial(config: &GameConfig, trial: usize) -> Result<TrialSummary> {
    let (tape_seed, policy_seed) = trial_seeds(config.master_seed, trial as u64);
    let tape = build_tape(config, tape_seed)?;
    let episode = run_episode(config, &tape, policy_seed)?;
    Ok(TrialSummary {
        regret: episode.regret_trajectory.iter().map(|&(_, r)| r).collect(),
        pulls: episode.pull_counts.iter().map(|&n| n as f64).collect(),
    })
}

/// Runs `config.trials` independent episodes on the global rayon pool.
pub fn run_trials(config: &GameConfig) -> Result<TrialAggregate> {
    config.validate()?;
    let summaries: Vec<TrialSummary> = (0..config.trials).into_par_iter().map(|j| run_trial(config, j)).collect::<Result<_>>()?;
    Ok(aggregate(config, &summaries))
}

/// Like [`run_trials`] but on a dedicated pool of `workers` threads.
pub fn run_trials_with_workers(config: &GameConfig, workers: usize) -> Result<TrialAggregate> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    pool.install(|| run_trials(config))
}

fn aggregate(config: &GameConfig, summaries: &[TrialSummary]) -> TrialAggregate {
    let column = |pick: &dyn Fn(&TrialSummary) -> f64| -> (f64, f64) {
        let values: Vec<f64> = summaries.iter().map(pick).collect();
        mean_std(&values)
    };
    let grid = checkpoints(config.horizon);
    let (mean_regret, std_regret) = (0..grid.len()).map(|c| column(&|s| s.regret[c])).unzip();
    let (mean_pull_counts, std_pull_counts) = (0..config.num_arms()).map(|a| column(&|s| s.pulls[a])).unzip();
    TrialAggregate {
        config_id: config_id(config),
        checkpoints: grid,
        mean_regret,
        std_regret,
        mean_pull_counts,
        std_pull_counts,
        trials: summaries.len(),
    }
}

/// e.g. `ucb/T=10000/B=10,10,0/LSI,LSI,LSI`.
pub fn config_id(config: &GameConfig) -> String {
    let budgets: Vec<String> = config.budgets().iter().map(|b| format!("{b}")).collect();
    let strategies: Vec<String> = config.strategies.iter().map(|s| s.to_string()).collect();
    format!("{}/T={}/B={}/{}", config.principal, config.horizon, budgets.join(","), strategies.join(","))
}

/// Plays the same config twice against one tape and one policy seed,
/// changing only the strategy of `focal_arm`.
pub fn run_coupled_pair(
    config: &GameConfig,
    focal_arm: usize,
    strategy_a: &StrategyKind,
    strategy_b: &StrategyKind,
    tape: &RewardTape,
    policy_seed: u64,
) -> Result<(EpisodeResult, EpisodeResult)> {
    if focal_arm >= config.num_arms() {
        return Err(Error::ArmOutOfRange { arm: focal_arm, arms: config.num_arms() });
    }
    let with = |strategy: &StrategyKind| {
        let mut strategies = config.strategies.clone();
        strategies[focal_arm] = strategy.clone();
        let mut cfg = config.clone();
        cfg.strategies = strategies;
        run_with_strategies(&cfg, &cfg.strategies, tape, policy_seed)
    };
    Ok((with(strategy_a)?, with(strategy_b)?))
}

/// `seq` with every pull of `arm` removed.
pub fn without_arm(seq: &[usize], arm: usize) -> Vec<usize> {
    seq.iter().copied().filter(|&a| a != arm).collect()
}

/// Whether `short` can be obtained from `long` by deleting elements.
pub fn is_subsequence(short: &[usize], long: &[usize]) -> bool {
    let mut it = long.iter();
    short.iter().all(|x| it.any(|y| y == x))
}

/// Whether either sequence is a subsequence of the other.
pub fn nested(a: &[usize], b: &[usize]) -> bool {
    if a.len() <= b.len() {
        is_subsequence(a, b)
    } else {
        is_subsequence(b, a)
    }
}

/// Outcome of comparing two strategies for one arm over many coupled tapes.
#[derive(Debug, Clone, PartialEq)]
pub struct DominanceSummary {
    pub pairs: usize,
    /// Pairs in which strategy b got strictly more focal pulls than a.
    pub violations: usize,
    /// Pairs whose focal-free pull sequences were not nested.
    pub subsequence_violations: usize,
    pub mean_pulls_a: f64,
    pub mean_pulls_b: f64,
}

/// Runs `config.trials` coupled pairs, trial `j` on the tape and policy
/// seed of trial `j`.
pub fn dominance_check(config: &GameConfig, focal_arm: usize, strategy_a: &StrategyKind, strategy_b: &StrategyKind) -> Result<DominanceSummary> {
    config.validate()?;
    let outcomes: Vec<(u64, u64, bool)> = (0..config.trials)
        .into_par_iter()
        .map(|j| {
            let (tape_seed, policy_seed) = trial_seeds(config.master_seed, j as u64);
            let tape = build_tape(config, tape_seed)?;
            let (a, b) = run_coupled_pair(config, focal_arm, strategy_a, strategy_b, &tape, policy_seed)?;
            let nested_ok = nested(&without_arm(&a.arm_sequence(), focal_arm), &without_arm(&b.arm_sequence(), focal_arm));
            Ok((a.pull_counts[focal_arm], b.pull_counts[focal_arm], nested_ok))
        })
        .collect::<Result<_>>()?;
    let pairs = outcomes.len();
    Ok(DominanceSummary {
        pairs,
        violations: outcomes.iter().filter(|(a, b, _)| b > a).count(),
        subsequence_violations: outcomes.iter().filter(|(_, _, ok)| !ok).count(),
        mean_pulls_a: outcomes.iter().map(|o| o.0 as f64).sum::<f64>() / pairs as f64,
        mean_pulls_b: outcomes.iter().map(|o| o.1 as f64).sum::<f64>() / pairs as f64,
    })
}
