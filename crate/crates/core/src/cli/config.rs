//! TOML config documents.
//!
//! ```toml
//! horizon = 10000
//! trials = 100
//! seed = 7
//! bounded = false
//!
//! [principal]
//! kind = "eps_greedy"   # "ucb" | "eps_greedy" | "thompson"
//! c = 1.3333333333333333
//!
//! [[arms]]
//! mean = 5.0
//! sigma = 1.0
//! budget = 10.0
//! strategy = "LSI"
//! ```
//!
//! An arm is either `{mean, sigma}` or `{beta_a, beta_b}`. `budget`
//! defaults to 0 and `strategy` to `"Zero"`; `trials` defaults to 1, `seed`
//! to 0 and `bounded` to false. Seeds above `i64::MAX` are written as hex
//! strings.

use std::path::Path;

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::error::ConfigError;
use crate::game::{ArmSpec, GameConfig, RewardDistribution};
use crate::principals::{ConfidenceWidth, PrincipalKind};

const TOP_KEYS: &[&str] = &["horizon", "trials", "seed", "bounded", "principal", "arms"];
const PRINCIPAL_KEYS: &[&str] = &["kind", "c", "width"];
const ARM_KEYS: &[&str] = &["mean", "sigma", "beta_a", "beta_b", "budget", "strategy"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SeedValue {
    Int(i64),
    Text(String),
}

impl SeedValue {
    pub fn from_u64(seed: u64) -> Self {
        match i64::try_from(seed) {
            Ok(v) => SeedValue::Int(v),
            Err(_) => SeedValue::Text(format!("{seed:#018x}")),
        }
    }

    pub fn to_u64(&self) -> Result<u64, ConfigError> {
        let bad = || ConfigError::Malformed(format!("seed must be a non-negative integer, got {self:?}"));
        match self {
            SeedValue::Int(v) => u64::try_from(*v).map_err(|_| bad()),
            SeedValue::Text(s) => {
                let s = s.trim();
                match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
                    Some(hex) => u64::from_str_radix(&hex.replace('_', ""), 16).map_err(|_| bad()),
                    None => s.parse().map_err(|_| bad()),
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrincipalDoc {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArmDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_b: Option<f64>,
    #[serde(default)]
    pub budget: f64,
    #[serde(default = "zero_strategy")]
    pub strategy: String,
}

fn zero_strategy() -> String {
    "Zero".into()
}

/// Serialized form of a [`GameConfig`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDoc {
    pub horizon: i64,
    #[serde(default = "one")]
    pub trials: i64,
    #[serde(default = "zero_seed")]
    pub seed: SeedValue,
    #[serde(default)]
    pub bounded: bool,
    pub principal: PrincipalDoc,
    pub arms: Vec<ArmDoc>,
}

fn one() -> i64 {
    1
}

fn zero_seed() -> SeedValue {
    SeedValue::Int(0)
}

fn check_keys(table: &Table, allowed: &[&str], context: &str) -> Result<(), ConfigError> {
    match table.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(key) => Err(ConfigError::UnknownKey(format!("{context}{key}"))),
        None => Ok(()),
    }
}

fn require(table: &Table, key: &str, context: &str) -> Result<(), ConfigError> {
    if table.contains_key(key) {
        Ok(())
    } else {
        Err(ConfigError::MissingKey(format!("{context}{key}")))
    }
}

/// Key-level validation that gives each missing or unknown key its own
/// error before serde sees the document.
fn check_shape(table: &Table) -> Result<(), ConfigError> {
    check_keys(table, TOP_KEYS, "")?;
    for key in ["horizon", "principal", "arms"] {
        require(table, key, "")?;
    }
    let principal = table["principal"].as_table().ok_or_else(|| ConfigError::Malformed("`principal` must be a table".into()))?;
    check_keys(principal, PRINCIPAL_KEYS, "principal.")?;
    require(principal, "kind", "principal.")?;
    let arms = table["arms"].as_array().ok_or_else(|| ConfigError::Malformed("`arms` must be an array of tables".into()))?;
    for (i, arm) in arms.iter().enumerate() {
        let arm = arm.as_table().ok_or_else(|| ConfigError::Malformed(format!("arms[{i}] must be a table")))?;
        let context = format!("arms[{i}].");
        check_keys(arm, ARM_KEYS, &context)?;
        let gaussian = arm.contains_key("mean") || arm.contains_key("sigma");
        let beta = arm.contains_key("beta_a") || arm.contains_key("beta_b");
        match (gaussian, beta) {
            (true, true) => return Err(ConfigError::Malformed(format!("arms[{i}] mixes gaussian and beta keys"))),
            (true, false) => {
                require(arm, "mean", &context)?;
                require(arm, "sigma", &context)?;
            }
            (false, true) => {
                require(arm, "beta_a", &context)?;
                require(arm, "beta_b", &context)?;
            }
            (false, false) => return Err(ConfigError::MissingKey(format!("{context}mean"))),
        }
    }
    Ok(())
}

impl ConfigDoc {
    pub fn from_table(table: Table) -> Result<Self, ConfigError> {
        check_shape(&table)?;
        Value::Table(table).try_into().map_err(|e: toml::de::Error| ConfigError::Malformed(e.message().to_string()))
    }

    pub fn from_config(config: &GameConfig) -> Self {
        let (kind, c) = match config.principal {
            PrincipalKind::Ucb => ("ucb", None),
            PrincipalKind::EpsGreedy { c } => ("eps_greedy", Some(c)),
            PrincipalKind::ThompsonSampling => ("thompson", None),
        };
        let width = match config.width {
            ConfidenceWidth::Horizon => None,
            ConfidenceWidth::Elapsed => Some("elapsed".to_string()),
        };
        let arms = config
            .arms
            .iter()
            .zip(&config.strategies)
            .map(|(arm, strategy)| {
                let mut doc = ArmDoc { mean: None, sigma: None, beta_a: None, beta_b: None, budget: arm.budget, strategy: strategy.to_string() };
                match arm.distribution {
                    RewardDistribution::Gaussian { mean, sigma } => {
                        doc.mean = Some(mean);
                        doc.sigma = Some(sigma);
                    }
                    RewardDistribution::Beta { a, b } => {
                        doc.beta_a = Some(a);
                        doc.beta_b = Some(b);
                    }
                }
                doc
            })
            .collect();
        ConfigDoc {
            horizon: config.horizon as i64,
            trials: config.trials as i64,
            seed: SeedValue::from_u64(config.master_seed),
            bounded: config.bounded_rewards,
            principal: PrincipalDoc { kind: kind.into(), c, width },
            arms,
        }
    }

    /// Builds and validates the config.
    pub fn to_config(&self) -> Result<GameConfig, ConfigError> {
        let principal = match self.principal.kind.as_str() {
            "ucb" => PrincipalKind::Ucb,
            "eps_greedy" => PrincipalKind::EpsGreedy { c: self.principal.c.ok_or_else(|| ConfigError::MissingKey("principal.c".into()))? },
            "thompson" => PrincipalKind::ThompsonSampling,
            other => return Err(ConfigError::InvalidPrincipal(format!("unknown kind `{other}`"))),
        };
        if self.principal.c.is_some() && !matches!(principal, PrincipalKind::EpsGreedy { .. }) {
            return Err(ConfigError::InvalidPrincipal(format!("`c` is only meaningful for eps_greedy, not {}", self.principal.kind)));
        }
        let width = match self.principal.width.as_deref() {
            None | Some("horizon") => ConfidenceWidth::Horizon,
            Some("elapsed") => ConfidenceWidth::Elapsed,
            Some(other) => return Err(ConfigError::InvalidPrincipal(format!("unknown width `{other}`"))),
        };
        let mut arms = Vec::with_capacity(self.arms.len());
        let mut strategies = Vec::with_capacity(self.arms.len());
        for (i, doc) in self.arms.iter().enumerate() {
            let distribution = match (doc.mean, doc.sigma, doc.beta_a, doc.beta_b) {
                (Some(mean), Some(sigma), None, None) => RewardDistribution::Gaussian { mean, sigma },
                (None, None, Some(a), Some(b)) => RewardDistribution::Beta { a, b },
                _ => return Err(ConfigError::Malformed(format!("arms[{i}] needs exactly one of {{mean, sigma}} or {{beta_a, beta_b}}"))),
            };
            arms.push(ArmSpec { distribution, budget: doc.budget });
            strategies.push(doc.strategy.parse()?);
        }
        let non_negative = |v: i64, key: &str| usize::try_from(v).map_err(|_| ConfigError::Malformed(format!("`{key}` must be non-negative, got {v}")));
        let config = GameConfig {
            arms,
            horizon: non_negative(self.horizon, "horizon")?,
            principal,
            width,
            strategies,
            trials: non_negative(self.trials, "trials")?,
            master_seed: self.seed.to_u64()?,
            bounded_rewards: self.bounded,
        };
        config.validate()?;
        Ok(config)
    }
}

/// Parses and validates an inline TOML config document.
pub fn parse_config(text: &str) -> Result<GameConfig, ConfigError> {
    let table: Table = text.parse().map_err(|e: toml::de::Error| ConfigError::Malformed(e.message().to_string()))?;
    ConfigDoc::from_table(table)?.to_config()
}

/// Reads and parses a config file. I/O failures are reported separately
/// from config errors.
pub fn parse_config_file(path: &Path) -> std::io::Result<Result<GameConfig, ConfigError>> {
    Ok(parse_config(&std::fs::read_to_string(path)?))
}

/// Renders `config` as a document that [`parse_config`] maps back to it.
pub fn render_config(config: &GameConfig) -> String {
    toml::to_string(&ConfigDoc::from_config(config)).expect("config documents always serialize")
}
