//! CSV tables and the run manifest.
//!
//! Floats are written with exactly six decimals and rows are sorted, so a
//! rerun with the same seed reproduces every file byte for byte.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::analysis::{BoundReport, Direction, Verdict};
use crate::cli::config::{ConfigDoc, SeedValue};
use crate::engine::{trial_seeds, DominanceSummary, TrialAggregate};
use crate::error::ConfigError;
use crate::game::GameConfig;

pub const REGRET_HEADER: [&str; 9] = ["experiment", "principal", "t", "B1", "B2", "B3", "mean_regret", "std_regret", "trials"];

fn fixed(v: f64) -> String {
    format!("{v:.6}")
}

/// Budgets of the first three arms; absent arms read as 0.
pub fn first_three_budgets(config: &GameConfig) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (slot, b) in out.iter_mut().zip(config.budgets()) {
        *slot = b;
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegretRow {
    pub experiment: String,
    pub principal: String,
    pub t: usize,
    pub budgets: [f64; 3],
    pub mean_regret: f64,
    pub std_regret: f64,
    pub trials: usize,
}

/// One row per checkpoint of `aggregate`.
pub fn regret_rows(experiment: &str, config: &GameConfig, aggregate: &TrialAggregate) -> Vec<RegretRow> {
    let budgets = first_three_budgets(config);
    aggregate
        .checkpoints
        .iter()
        .enumerate()
        .map(|(i, &t)| RegretRow {
            experiment: experiment.to_string(),
            principal: config.principal.name().to_string(),
            t,
            budgets,
            mean_regret: aggregate.mean_regret[i],
            std_regret: aggregate.std_regret[i],
            trials: aggregate.trials,
        })
        .collect()
}

fn writer<W: Write>(sink: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(sink)
}

fn finish<W: Write>(w: csv::Writer<W>) -> std::io::Result<()> {
    w.into_inner().map_err(|e| e.into_error())?.flush()
}

fn csv_io(e: csv::Error) -> std::io::Error {
    std::io::Error::other(e)
}

/// Writes rows sorted by `(experiment, principal, t)`.
pub fn write_regret_csv<W: Write>(sink: W, rows: &[RegretRow]) -> std::io::Result<()> {
    let mut sorted: Vec<&RegretRow> = rows.iter().collect();
    sorted.sort_by(|a, b| (&a.experiment, &a.principal, a.t).cmp(&(&b.experiment, &b.principal, b.t)));
    let mut w = writer(sink);
    w.write_record(REGRET_HEADER).map_err(csv_io)?;
    for r in sorted {
        w.write_record([
            r.experiment.clone(),
            r.principal.clone(),
            r.t.to_string(),
            fixed(r.budgets[0]),
            fixed(r.budgets[1]),
            fixed(r.budgets[2]),
            fixed(r.mean_regret),
            fixed(r.std_regret),
            r.trials.to_string(),
        ])
        .map_err(csv_io)?;
    }
    finish(w)
}

pub const BOUND_HEADER: [&str; 11] =
    ["experiment", "principal", "bound", "arm", "direction", "theoretical", "empirical", "ci_halfwidth", "binding", "in_regime", "verdict"];

/// Writes bound reports in the order given. Arms are 1-based; an empty arm
/// cell means the bound is not per-arm.
pub fn write_bound_csv<W: Write>(sink: W, rows: &[(String, String, BoundReport)]) -> std::io::Result<()> {
    let mut w = writer(sink);
    w.write_record(BOUND_HEADER).map_err(csv_io)?;
    for (experiment, principal, r) in rows {
        let direction = match r.direction {
            Direction::Upper => "upper",
            Direction::Lower => "lower",
        };
        let verdict = match r.verdict() {
            Verdict::Satisfied => "satisfied",
            Verdict::Violated => "violated",
            Verdict::NonBinding => "non_binding",
        };
        w.write_record([
            experiment.clone(),
            principal.clone(),
            r.bound_name.clone(),
            r.arm.map(|a| (a + 1).to_string()).unwrap_or_default(),
            direction.to_string(),
            fixed(r.theoretical_value),
            fixed(r.empirical_value),
            fixed(r.empirical_ci_halfwidth),
            r.binding.to_string(),
            r.in_regime.to_string(),
            verdict.to_string(),
        ])
        .map_err(csv_io)?;
    }
    finish(w)
}

pub const COUPLE_HEADER: [&str; 10] =
    ["experiment", "principal", "arm", "strategy_a", "strategy_b", "pairs", "violations", "subsequence_violations", "mean_pulls_a", "mean_pulls_b"];

#[derive(Debug, Clone, PartialEq)]
pub struct CoupleRow {
    pub experiment: String,
    pub principal: String,
    /// 0-based.
    pub arm: usize,
    pub strategy_a: String,
    pub strategy_b: String,
    pub summary: DominanceSummary,
}

pub fn write_couple_csv<W: Write>(sink: W, rows: &[CoupleRow]) -> std::io::Result<()> {
    let mut w = writer(sink);
    w.write_record(COUPLE_HEADER).map_err(csv_io)?;
    for r in rows {
        let s = &r.summary;
        w.write_record([
            r.experiment.clone(),
            r.principal.clone(),
            (r.arm + 1).to_string(),
            r.strategy_a.clone(),
            r.strategy_b.clone(),
            s.pairs.to_string(),
            s.violations.to_string(),
            s.subsequence_violations.to_string(),
            fixed(s.mean_pulls_a),
            fixed(s.mean_pulls_b),
        ])
        .map_err(csv_io)?;
    }
    finish(w)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestRun {
    pub experiment: String,
    pub output: String,
    pub config_id: String,
    /// Per-trial tape and policy seeds, in trial order.
    pub tape_seeds: Vec<SeedValue>,
    pub policy_seeds: Vec<SeedValue>,
    pub config: ConfigDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub library_version: String,
    pub source: String,
    #[serde(default)]
    pub notes: Vec<String>,
    pub runs: Vec<ManifestRun>,
}

impl ManifestRun {
    pub fn new(experiment: &str, output: &str, config: &GameConfig) -> Self {
        let seeds: Vec<(u64, u64)> = (0..config.trials as u64).map(|j| trial_seeds(config.master_seed, j)).collect();
        ManifestRun {
            experiment: experiment.to_string(),
            output: output.to_string(),
            config_id: crate::engine::config_id(config),
            tape_seeds: seeds.iter().map(|s| SeedValue::from_u64(s.0)).collect(),
            policy_seeds: seeds.iter().map(|s| SeedValue::from_u64(s.1)).collect(),
            config: ConfigDoc::from_config(config),
        }
    }
}

impl Manifest {
    pub fn render(&self) -> String {
        toml::to_string(self).expect("manifests always serialize")
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Malformed(e.message().to_string()))
    }

    /// Rebuilds and validates every embedded config.
    pub fn configs(&self) -> Result<Vec<GameConfig>, ConfigError> {
        self.runs.iter().map(|r| r.config.to_config()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::presets::preset;

    fn row(experiment: &str, principal: &str, t: usize) -> RegretRow {
        RegretRow { experiment: experiment.into(), principal: principal.into(), t, budgets: [10.0, 10.0, 0.0], mean_regret: 1.0 / 3.0, std_regret: 0.0, trials: 100 }
    }

    #[test]
    fn regret_csv_is_sorted_and_fixed_point() {
        let rows = vec![row("fig1-b010", "ucb", 10), row("fig1-b010", "ucb", 2), row("fig1-b000", "ucb", 5), row("fig1-b010", "eps_greedy", 1)];
        let mut out = Vec::new();
        write_regret_csv(&mut out, &rows).unwrap();
        let text = String::from_utf8(out).unwrap();
        let expected = "experiment,principal,t,B1,B2,B3,mean_regret,std_regret,trials\n\
            fig1-b000,ucb,5,10.000000,10.000000,0.000000,0.333333,0.000000,100\n\
            fig1-b010,eps_greedy,1,10.000000,10.000000,0.000000,0.333333,0.000000,100\n\
            fig1-b010,ucb,2,10.000000,10.000000,0.000000,0.333333,0.000000,100\n\
            fig1-b010,ucb,10,10.000000,10.000000,0.000000,0.333333,0.000000,100\n";
        assert_eq!(text, expected);
    }

    #[test]
    fn budgets_pad_and_truncate() {
        let p = preset("fig2", 0).unwrap();
        let mut cfg = p.experiments[0].config.clone();
        assert_eq!(first_three_budgets(&cfg), [0.0, 0.0, 0.0]);
        cfg.arms.truncate(2);
        cfg.arms[0].budget = 4.0;
        assert_eq!(first_three_budgets(&cfg), [4.0, 0.0, 0.0]);
    }

    #[test]
    fn manifest_round_trips_configs() {
        let p = preset("bounded", u64::MAX).unwrap();
        let manifest = Manifest {
            library_version: "0.0.0".into(),
            source: "preset bounded".into(),
            notes: p.notes.clone(),
            runs: p.experiments.iter().take(4).map(|e| ManifestRun::new(&e.name, &e.output, &e.config)).collect(),
        };
        let parsed = Manifest::parse(&manifest.render()).unwrap();
        assert_eq!(parsed, manifest);
        let configs: Vec<GameConfig> = p.experiments.iter().take(4).map(|e| e.config.clone()).collect();
        assert_eq!(parsed.configs().unwrap(), configs);
        assert_eq!(parsed.runs[0].tape_seeds.len(), 100);
        let (tape, policy) = trial_seeds(u64::MAX, 7);
        assert_eq!(parsed.runs[0].tape_seeds[7].to_u64().unwrap(), tape);
        assert_eq!(parsed.runs[0].policy_seeds[7].to_u64().unwrap(), policy);
    }
}
