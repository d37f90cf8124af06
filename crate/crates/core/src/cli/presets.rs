//! The built-in experiment suites.

use crate::game::{ArmSpec, GameConfig};
use crate::principals::PrincipalKind;
use crate::strategies::StrategyKind;

pub const PRESET_NAMES: &[&str] = &["fig1", "fig2", "bounded"];

/// Per-arm budgets swept in the time-series suites.
pub const TIME_BUDGETS: [f64; 3] = [0.0, 10.0, 100.0];

/// Total budget grid of the budget sweeps. Evenly spaced stand-in values.
pub const BUDGET_GRID: [f64; 6] = [0.0, 40.0, 80.0, 120.0, 160.0, 200.0];

pub const HORIZON: usize = 10_000;
pub const TRIALS: usize = 100;

/// How a total budget `B` is divided among the three arms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BudgetSplit {
    /// `(B/2, B/2, 0)`.
    Suboptimal,
    /// `(B, 0, 0)`.
    FirstArm,
    /// `(B/2, B/2, B/2)`.
    AllArms,
}

impl BudgetSplit {
    pub const ALL: [BudgetSplit; 3] = [BudgetSplit::Suboptimal, BudgetSplit::FirstArm, BudgetSplit::AllArms];

    pub fn budgets(self, total: f64) -> [f64; 3] {
        match self {
            BudgetSplit::Suboptimal => [total / 2.0, total / 2.0, 0.0],
            BudgetSplit::FirstArm => [total, 0.0, 0.0],
            BudgetSplit::AllArms => [total / 2.0, total / 2.0, total / 2.0],
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            BudgetSplit::Suboptimal => "split1",
            BudgetSplit::FirstArm => "split2",
            BudgetSplit::AllArms => "split3",
        }
    }
}

/// One configuration of a preset and where its rows go.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    /// e.g. `fig2-split1-b040`; sorts in budget order.
    pub name: String,
    pub output: String,
    pub config: GameConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPreset {
    pub name: String,
    pub experiments: Vec<Experiment>,
    /// Free-form remarks copied into the manifest.
    pub notes: Vec<String>,
}

impl ExperimentPreset {
    /// Output file names in first-use order.
    pub fn outputs(&self) -> Vec<&str> {
        let mut outputs: Vec<&str> = Vec::new();
        for e in &self.experiments {
            if !outputs.contains(&e.output.as_str()) {
                outputs.push(&e.output);
            }
        }
        outputs
    }

    /// Applies the `--seed` and `--trials` overrides to every experiment.
    pub fn override_with(&mut self, seed: Option<u64>, trials: Option<usize>) {
        for e in &mut self.experiments {
            if let Some(seed) = seed {
                e.config.master_seed = seed;
            }
            if let Some(trials) = trials {
                e.config.trials = trials;
            }
        }
    }
}

fn budget_tag(total: f64) -> String {
    format!("b{:03}", total.round() as i64)
}

/// Gaussian arms with means (5, 8, 10) and unit variance.
pub fn gaussian_arms(budgets: [f64; 3]) -> Vec<ArmSpec> {
    [5.0, 8.0, 10.0].iter().zip(budgets).map(|(&m, b)| ArmSpec::gaussian(m, 1.0, b)).collect()
}

/// Beta(1,1), Beta(2,1) and Beta(3,1) arms.
pub fn beta_arms(budgets: [f64; 3]) -> Vec<ArmSpec> {
    [1.0, 2.0, 3.0].iter().zip(budgets).map(|(&a, b)| ArmSpec::beta(a, 1.0, b)).collect()
}

/// `epsilon_t = min{1, 4/t}` over three arms.
pub fn gaussian_principals() -> [PrincipalKind; 3] {
    [PrincipalKind::Ucb, PrincipalKind::EpsGreedy { c: 4.0 / 3.0 }, PrincipalKind::ThompsonSampling]
}

/// `epsilon_t = min{1, 20/t}` over three arms.
pub fn bounded_principals() -> [PrincipalKind; 3] {
    [PrincipalKind::Ucb, PrincipalKind::EpsGreedy { c: 20.0 / 3.0 }, PrincipalKind::ThompsonSampling]
}

struct Family {
    arms: fn([f64; 3]) -> Vec<ArmSpec>,
    principals: [PrincipalKind; 3],
    strategy: StrategyKind,
    bounded: bool,
}

impl Family {
    fn config(&self, budgets: [f64; 3], principal: PrincipalKind, seed: u64) -> GameConfig {
        GameConfig {
            trials: TRIALS,
            master_seed: seed,
            bounded_rewards: self.bounded,
            ..GameConfig::uniform((self.arms)(budgets), HORIZON, principal, self.strategy.clone())
        }
    }

    fn time_suite(&self, prefix: &str, output: &str, seed: u64) -> Vec<Experiment> {
        let mut out = Vec::new();
        for b in TIME_BUDGETS {
            for principal in self.principals {
                out.push(Experiment {
                    name: format!("{prefix}-{}", budget_tag(b)),
                    output: output.to_string(),
                    config: self.config([b, b, 0.0], principal, seed),
                });
            }
        }
        out
    }

    fn budget_suite(&self, prefix: &str, output: &str, seed: u64) -> Vec<Experiment> {
        let mut out = Vec::new();
        for split in BudgetSplit::ALL {
            for total in BUDGET_GRID {
                for principal in self.principals {
                    out.push(Experiment {
                        name: format!("{prefix}-{}-{}", split.label(), budget_tag(total)),
                        output: output.to_string(),
                        config: self.config(split.budgets(total), principal, seed),
                    });
                }
            }
        }
        out
    }
}

fn gaussian_family() -> Family {
    Family { arms: gaussian_arms, principals: gaussian_principals(), strategy: StrategyKind::Lsi, bounded: false }
}

fn bounded_family() -> Family {
    Family { arms: beta_arms, principals: bounded_principals(), strategy: StrategyKind::Lsibr, bounded: true }
}

fn grid_note() -> String {
    format!("budget grid {BUDGET_GRID:?} is an evenly spaced stand-in; B is the total budget of arms 1 and 2")
}

/// Looks up a preset by name. Every experiment shares `seed`, so all
/// configs of a preset replay the same reward tapes.
pub fn preset(name: &str, seed: u64) -> Option<ExperimentPreset> {
    let (experiments, notes) = match name {
        "fig1" => (gaussian_family().time_suite("fig1", "fig1_regret.csv", seed), vec![]),
        "fig2" => (gaussian_family().budget_suite("fig2", "fig2_regret.csv", seed), vec![grid_note()]),
        "bounded" => {
            let family = bounded_family();
            let mut experiments = family.time_suite("bounded-time", "bounded_time_regret.csv", seed);
            experiments.extend(family.budget_suite("bounded-budget", "bounded_budget_regret.csv", seed));
            (experiments, vec![grid_note()])
        }
        _ => return None,
    };
    Some(ExperimentPreset { name: name.to_string(), experiments, notes })
}
