//! Closed-form regret and pull-count bounds, and checks of trial aggregates
//! against them.
//!
//! Every bound is a pure function of the config scalars: arm means, budgets,
//! the principal's sigma, the horizon and (for epsilon-greedy) the constant
//! `c`. Where the underlying analysis only states an `O(ln T)` remainder,
//! the remainder is instantiated with the explicit constants its proof
//! produces, so each bound evaluates to a concrete number.

use std::f64::consts::PI;
use std::fmt;

use crate::engine::TrialAggregate;
use crate::error::{Error, Result};
use crate::game::{gap_profile, GameConfig, GapProfile};
use crate::principals::PrincipalKind;
use crate::strategies::StrategyKind;

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

fn suboptimal(config: &GameConfig, arm: usize) -> Result<GapProfile> {
    let profile = gap_profile(config)?;
    if arm >= profile.gaps.len() {
        return Err(Error::ArmOutOfRange { arm, arms: profile.gaps.len() });
    }
    if arm == profile.optimal {
        return Err(Error::OptimalArm(arm));
    }
    Ok(profile)
}

fn ln_horizon(config: &GameConfig) -> f64 {
    (config.horizon as f64).ln()
}

fn require_lsi(config: &GameConfig, profile: &GapProfile) -> Result<()> {
    for (i, s) in config.strategies.iter().enumerate() {
        if i != profile.optimal && *s != StrategyKind::Lsi {
            return Err(Error::Precondition(format!("arm {} uses {s}, this bound needs LSI on every sub-optimal arm", i + 1)));
        }
    }
    Ok(())
}

/// `sum over sub-optimal arms of B_i / (2 gap_i)`: pulls that LSI buys
/// away from the optimal arm.
pub fn lsi_budget_term(config: &GameConfig) -> Result<f64> {
    let profile = gap_profile(config)?;
    Ok(config
        .arms
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != profile.optimal)
        .map(|(i, a)| a.budget / (2.0 * profile.gaps[i]))
        .sum())
}

/// Expected pulls of a sub-optimal arm under UCB:
/// `max{3B/gap, 81 sigma^2 ln T / gap^2} + 3`.
pub fn ucb_pull_bound(config: &GameConfig, arm: usize) -> Result<f64> {
    let profile = suboptimal(config, arm)?;
    let gap = profile.gaps[arm];
    let sigma = config.sigma();
    let budget_branch = 3.0 * config.arms[arm].budget / gap;
    let log_branch = 81.0 * sigma * sigma * ln_horizon(config) / (gap * gap);
    Ok(budget_branch.max(log_branch) + 3.0)
}

/// UCB regret bound, `sum_i gap_i * ucb_pull_bound(i)`.
pub fn ucb_regret_bound(config: &GameConfig) -> Result<f64> {
    let profile = gap_profile(config)?;
    (0..config.num_arms())
        .filter(|&i| i != profile.optimal)
        .map(|i| Ok(profile.gaps[i] * ucb_pull_bound(config, i)?))
        .sum()
}

/// Expected pulls of the optimal arm under UCB when every sub-optimal arm
/// plays LSI:
/// `T - sum B_i/(2 gap_i) + 36 sigma^2 ln T / min_gap^2 + 1 + 2(K-1)/T`.
pub fn ucb_optimal_pull_upper_bound(config: &GameConfig) -> Result<f64> {
    let profile = gap_profile(config)?;
    require_lsi(config, &profile)?;
    Ok(config.horizon as f64 - lsi_budget_term(config)? + ucb_optimal_residual(config, &profile))
}

fn ucb_optimal_residual(config: &GameConfig, profile: &GapProfile) -> f64 {
    let sigma = config.sigma();
    let t = config.horizon as f64;
    let k = config.num_arms() as f64;
    36.0 * sigma * sigma * ln_horizon(config) / profile.min_gap.powi(2) + 1.0 + 2.0 * (k - 1.0) / t
}

/// Regret lower bound for UCB under LSI:
/// `min_gap * (T - ucb_optimal_pull_upper_bound)`. Negative when the
/// budgets are too small to matter.
pub fn lsi_regret_lower_bound(config: &GameConfig) -> Result<f64> {
    let profile = gap_profile(config)?;
    Ok(profile.min_gap * (config.horizon as f64 - ucb_optimal_pull_upper_bound(config)?))
}

/// `max{20, 36 sigma^2 / min_gap^2}`, the epsilon-greedy constant the
/// sub-optimal pull bound is proved for.
pub fn theoretical_eps_c(config: &GameConfig) -> Result<f64> {
    let profile = gap_profile(config)?;
    let sigma = config.sigma();
    Ok(f64::max(20.0, 36.0 * sigma * sigma / profile.min_gap.powi(2)))
}

fn eps_c(config: &GameConfig) -> Result<f64> {
    match config.principal {
        PrincipalKind::EpsGreedy { c } => Ok(c),
        other => Err(Error::Precondition(format!("epsilon-greedy bound evaluated for a {other} principal"))),
    }
}

/// A bound that is only proved for some parameter regime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeBound {
    pub value: f64,
    /// Smallest constant `c` for which the bound is proved.
    pub required_c: f64,
    pub in_regime: bool,
}

/// Pieces of the logarithmic part shared by both epsilon-greedy bounds.
struct EpsPieces {
    floor_ck: f64,
    log_ratio: f64,
    c: f64,
    k: f64,
}

impl EpsPieces {
    fn new(config: &GameConfig, c: f64) -> Self {
        let k = config.num_arms() as f64;
        let floor_ck = (c * k).floor().max(1.0);
        Self { floor_ck, log_ratio: (config.horizon as f64 / floor_ck).ln(), c, k }
    }

    /// `floor(cK)/K + c ln(T/floor(cK))`: expected uniform-exploration pulls.
    fn exploration(&self) -> f64 {
        self.floor_ck / self.k + self.c * self.log_ratio
    }

    /// `(floor(cK) - K) 2(floor(cK)+1)^2 pi^2/3 + (floor(cK)+1)(c + scale) ln(T/floor(cK))`.
    fn concentration(&self, scale: f64) -> f64 {
        (self.floor_ck - self.k) * 2.0 * (self.floor_ck + 1.0).powi(2) * PI * PI / 3.0
            + (self.floor_ck + 1.0) * (self.c + scale) * self.log_ratio
    }
}

/// Expected pulls of a sub-optimal arm under epsilon-greedy:
/// `1 + 3B/gap + floor(cK)/K + c ln(T/floor(cK))
///  + (floor(cK)-K) 2(floor(cK)+1)^2 pi^2/3
///  + (floor(cK)+1)(c + 18 sigma^2/gap^2) ln(T/floor(cK))`,
/// proved for `c >= max{20, 36 sigma^2/gap^2}`.
pub fn eps_greedy_pull_bound(config: &GameConfig, arm: usize) -> Result<RegimeBound> {
    let profile = suboptimal(config, arm)?;
    let c = eps_c(config)?;
    let gap = profile.gaps[arm];
    let sigma2 = config.sigma().powi(2);
    let pieces = EpsPieces::new(config, c);
    let value = 1.0 + 3.0 * config.arms[arm].budget / gap + pieces.exploration() + pieces.concentration(18.0 * sigma2 / (gap * gap));
    let required_c = f64::max(20.0, 36.0 * sigma2 / (gap * gap));
    Ok(RegimeBound { value, required_c, in_regime: c >= required_c })
}

/// Sub-optimal pull bound under Thompson sampling, itemised.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TsPullBound {
    /// `6B/gap`.
    pub budget_branch: f64,
    /// `72 sigma^2 ln T / gap^2`.
    pub log_branch: f64,
    /// The forced initialization pull.
    pub initial: f64,
    /// `18 ln T / gap^2 + 1`: pulls while the arm's sample is too high.
    pub sample_overshoot: f64,
    /// `(e^{11 sigma^2/4} + pi^2/3) ceil(L) + 4/gap^2` with
    /// `L = 72 ln(T gap^2) max{1, sigma^2} / gap^2`.
    pub geometric: f64,
    /// `max{6B/gap, 144 sigma^2 ln T / gap^2} + 1`: pulls while the
    /// observed mean is too high.
    pub mean_overshoot: f64,
}

impl TsPullBound {
    pub fn headline(&self) -> f64 {
        self.budget_branch.max(self.log_branch)
    }

    pub fn residual(&self) -> f64 {
        self.initial + self.sample_overshoot + self.geometric + self.mean_overshoot
    }

    pub fn value(&self) -> f64 {
        self.headline() + self.residual()
    }

    pub fn budget_dominated(&self) -> bool {
        self.budget_branch > self.log_branch
    }
}

fn geometric_sample_count(config: &GameConfig, gap: f64) -> f64 {
    let sigma2 = config.sigma().powi(2);
    let t = config.horizon as f64;
    let l = 72.0 * (t * gap * gap).ln() * sigma2.max(1.0) / (gap * gap);
    (f64::exp(11.0 * sigma2 / 4.0) + PI * PI / 3.0) * l.max(0.0).ceil() + 4.0 / (gap * gap)
}

pub fn ts_pull_bound(config: &GameConfig, arm: usize) -> Result<TsPullBound> {
    let profile = suboptimal(config, arm)?;
    let gap = profile.gaps[arm];
    let sigma2 = config.sigma().powi(2);
    let ln_t = ln_horizon(config);
    let budget_branch = 6.0 * config.arms[arm].budget / gap;
    Ok(TsPullBound {
        budget_branch,
        log_branch: 72.0 * sigma2 * ln_t / (gap * gap),
        initial: 1.0,
        sample_overshoot: 18.0 * ln_t / (gap * gap) + 1.0,
        geometric: geometric_sample_count(config, gap),
        mean_overshoot: budget_branch.max(144.0 * sigma2 * ln_t / (gap * gap)) + 1.0,
    })
}

/// Upper bound on the optimal arm's pulls for a randomized principal when
/// every sub-optimal arm plays LSI.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalPullBound {
    pub horizon: f64,
    /// `sum B_i/(2 gap_i)`, identical for every principal.
    pub budget_term: f64,
    pub residual: f64,
    /// Smallest admissible epsilon-greedy constant; 0 for Thompson sampling.
    pub required_c: f64,
    pub in_regime: bool,
}

impl OptimalPullBound {
    pub fn value(&self) -> f64 {
        self.horizon - self.budget_term + self.residual
    }
}

/// Epsilon-greedy residual:
/// `1 + floor(cK)/K + c ln(T/floor(cK)) + sum_i [(floor(cK)-K) 2(floor(cK)+1)^2 pi^2/3
///  + (floor(cK)+1)(c + 8 sigma^2/gap_i^2) ln(T/floor(cK))]`, proved for
/// `c >= max{20, 16 sigma^2/gap_k^2}`.
///
/// Thompson sampling residual:
/// `1 + sum_i [18 sigma^2/gap_i^2 + 18 ln T/gap_i^2 + 1
///  + (e^{11 sigma^2/4} + pi^2/3) ceil(L_i) + 4/gap_i^2]`.
pub fn randomized_optimal_pull_upper_bound(config: &GameConfig) -> Result<OptimalPullBound> {
    let profile = gap_profile(config)?;
    require_lsi(config, &profile)?;
    let sigma2 = config.sigma().powi(2);
    let ln_t = ln_horizon(config);
    let gaps: Vec<f64> = (0..config.num_arms()).filter(|&i| i != profile.optimal).map(|i| profile.gaps[i]).collect();
    let (residual, required_c, in_regime) = match config.principal {
        PrincipalKind::EpsGreedy { c } => {
            let pieces = EpsPieces::new(config, c);
            let per_arm: f64 = gaps.iter().map(|g| pieces.concentration(8.0 * sigma2 / (g * g))).sum();
            let required = f64::max(20.0, 16.0 * sigma2 / profile.min_gap.powi(2));
            (1.0 + pieces.exploration() + per_arm, required, c >= required)
        }
        PrincipalKind::ThompsonSampling => {
            let per_arm: f64 = gaps
                .iter()
                .map(|g| 18.0 * sigma2 / (g * g) + 18.0 * ln_t / (g * g) + 1.0 + geometric_sample_count(config, *g))
                .sum();
            (1.0 + per_arm, 0.0, true)
        }
        PrincipalKind::Ucb => {
            return Err(Error::Precondition("use ucb_optimal_pull_upper_bound for a UCB principal".into()));
        }
    };
    Ok(OptimalPullBound {
        horizon: config.horizon as f64,
        budget_term: lsi_budget_term(config)?,
        residual,
        required_c,
        in_regime,
    })
}

/// `min_gap * (T - randomized_optimal_pull_upper_bound)`.
pub fn randomized_regret_lower_bound(config: &GameConfig) -> Result<f64> {
    let profile = gap_profile(config)?;
    let bound = randomized_optimal_pull_upper_bound(config)?;
    Ok(profile.min_gap * (config.horizon as f64 - bound.value()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Upper,
    Lower,
}

/// A checkable bound together with what it is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    /// Pulls of a sub-optimal arm under UCB.
    UcbPulls { arm: usize },
    /// Final regret under UCB.
    UcbRegret,
    /// Pulls of the optimal arm under UCB with LSI arms.
    UcbOptimalPulls,
    /// Final regret under UCB with LSI arms, from below.
    LsiRegretLower,
    /// Pulls of a sub-optimal arm under epsilon-greedy.
    EpsGreedyPulls { arm: usize },
    /// Pulls of a sub-optimal arm under Thompson sampling.
    TsPulls { arm: usize },
    /// Pulls of the optimal arm under a randomized principal with LSI arms.
    RandomizedOptimalPulls,
    /// Final regret under a randomized principal with LSI arms, from below.
    RandomizedRegretLower,
}

impl Bound {
    pub fn direction(&self) -> Direction {
        match self {
            Bound::LsiRegretLower | Bound::RandomizedRegretLower => Direction::Lower,
            _ => Direction::Upper,
        }
    }

    pub fn arm(&self) -> Option<usize> {
        match *self {
            Bound::UcbPulls { arm } | Bound::EpsGreedyPulls { arm } | Bound::TsPulls { arm } => Some(arm),
            _ => None,
        }
    }

    /// Every bound that applies to `config`'s principal and strategies.
    pub fn applicable(config: &GameConfig) -> Result<Vec<Bound>> {
        let profile = gap_profile(config)?;
        let all_lsi = require_lsi(config, &profile).is_ok();
        let subopt = (0..config.num_arms()).filter(|&i| i != profile.optimal);
        let mut bounds = Vec::new();
        match config.principal {
            PrincipalKind::Ucb => {
                bounds.extend(subopt.map(|arm| Bound::UcbPulls { arm }));
                bounds.push(Bound::UcbRegret);
                if all_lsi {
                    bounds.extend([Bound::UcbOptimalPulls, Bound::LsiRegretLower]);
                }
            }
            PrincipalKind::EpsGreedy { .. } => bounds.extend(subopt.map(|arm| Bound::EpsGreedyPulls { arm })),
            PrincipalKind::ThompsonSampling => bounds.extend(subopt.map(|arm| Bound::TsPulls { arm })),
        }
        if config.principal.is_randomized() && all_lsi {
            bounds.extend([Bound::RandomizedOptimalPulls, Bound::RandomizedRegretLower]);
        }
        Ok(bounds)
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::UcbPulls { .. } => f.write_str("ucb_pulls"),
            Bound::UcbRegret => f.write_str("ucb_regret"),
            Bound::UcbOptimalPulls => f.write_str("ucb_optimal_pulls"),
            Bound::LsiRegretLower => f.write_str("lsi_regret_lower"),
            Bound::EpsGreedyPulls { .. } => f.write_str("eps_greedy_pulls"),
            Bound::TsPulls { .. } => f.write_str("ts_pulls"),
            Bound::RandomizedOptimalPulls => f.write_str("randomized_optimal_pulls"),
            Bound::RandomizedRegretLower => f.write_str("randomized_regret_lower"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Satisfied,
    Violated,
    /// The bound is vacuous for this config and says nothing.
    NonBinding,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub bound_name: String,
    pub arm: Option<usize>,
    pub direction: Direction,
    pub theoretical_value: f64,
    pub empirical_value: f64,
    /// 95% normal-approximation half-width over trials.
    pub empirical_ci_halfwidth: f64,
    pub binding: bool,
    /// Whether the parameter regime the bound is proved for holds.
    pub in_regime: bool,
    pub satisfied: bool,
}

impl BoundReport {
    pub fn verdict(&self) -> Verdict {
        match (self.binding, self.satisfied) {
            (false, _) => Verdict::NonBinding,
            (true, true) => Verdict::Satisfied,
            (true, false) => Verdict::Violated,
        }
    }
}

fn ci_halfwidth(std: f64, trials: usize) -> f64 {
    Z_95 * std / (trials as f64).sqrt()
}

fn require_principal(config: &GameConfig, wanted: &[&str], bound: &Bound) -> Result<()> {
    if wanted.contains(&config.principal.name()) {
        Ok(())
    } else {
        Err(Error::Precondition(format!("{bound} does not apply to a {} principal", config.principal)))
    }
}

/// Compares the aggregate produced under `config` with `bound`.
pub fn check(config: &GameConfig, aggregate: &TrialAggregate, bound: Bound) -> Result<BoundReport> {
    let profile = gap_profile(config)?;
    let t = config.horizon as f64;
    let max_regret = t * profile.gaps.iter().copied().fold(0.0, f64::max);
    let pulls = |arm: usize| -> Result<(f64, f64)> {
        let mean = *aggregate.mean_pull_counts.get(arm).ok_or(Error::ArmOutOfRange { arm, arms: aggregate.mean_pull_counts.len() })?;
        Ok((mean, ci_halfwidth(aggregate.std_pull_counts[arm], aggregate.trials)))
    };
    let regret = (aggregate.final_mean_regret(), ci_halfwidth(aggregate.final_std_regret(), aggregate.trials));

    let (theoretical, (empirical, ci), binding, in_regime) = match bound {
        Bound::UcbPulls { arm } => {
            require_principal(config, &["ucb"], &bound)?;
            let v = ucb_pull_bound(config, arm)?;
            (v, pulls(arm)?, v < t, true)
        }
        Bound::UcbRegret => {
            require_principal(config, &["ucb"], &bound)?;
            let v = ucb_regret_bound(config)?;
            (v, regret, v < max_regret, true)
        }
        Bound::UcbOptimalPulls => {
            require_principal(config, &["ucb"], &bound)?;
            let v = ucb_optimal_pull_upper_bound(config)?;
            (v, pulls(profile.optimal)?, v < t, true)
        }
        Bound::LsiRegretLower => {
            require_principal(config, &["ucb"], &bound)?;
            let v = lsi_regret_lower_bound(config)?;
            (v, regret, v > 0.0, true)
        }
        Bound::EpsGreedyPulls { arm } => {
            let b = eps_greedy_pull_bound(config, arm)?;
            (b.value, pulls(arm)?, b.value < t, b.in_regime)
        }
        Bound::TsPulls { arm } => {
            require_principal(config, &["thompson"], &bound)?;
            let v = ts_pull_bound(config, arm)?.value();
            (v, pulls(arm)?, v < t, true)
        }
        Bound::RandomizedOptimalPulls => {
            let b = randomized_optimal_pull_upper_bound(config)?;
            (b.value(), pulls(profile.optimal)?, b.value() < t, b.in_regime)
        }
        Bound::RandomizedRegretLower => {
            let b = randomized_optimal_pull_upper_bound(config)?;
            let v = randomized_regret_lower_bound(config)?;
            (v, regret, v > 0.0, b.in_regime)
        }
    };
    let satisfied = match bound.direction() {
        Direction::Upper => empirical + ci <= theoretical,
        Direction::Lower => empirical - ci >= theoretical,
    };
    Ok(BoundReport {
        bound_name: bound.to_string(),
        arm: bound.arm(),
        direction: bound.direction(),
        theoretical_value: theoretical,
        empirical_value: empirical,
        empirical_ci_halfwidth: ci,
        binding,
        in_regime,
        satisfied,
    })
}
