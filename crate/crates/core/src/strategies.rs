//! Arm-side manipulation strategies.
//!
//! A strategy is consulted only when its own arm is pulled, and it only sees
//! its own history: the ordinal of the pull, the true reward just drawn and
//! what it has spent so far. Every manipulation is debited from the budget by
//! its absolute value.

use std::fmt;
use std::str::FromStr;

use crate::error::ConfigError;
use crate::game::BUDGET_TOLERANCE;

#[derive(Debug, Clone, PartialEq)]
pub enum StrategyKind {
    /// Never manipulates.
    Zero,
    /// Lump sum investing: spend everything that remains on every own pull,
    /// which in practice means all of it on the first.
    Lsi,
    /// Bounded-reward LSI: lift each realized reward to 1 until the budget
    /// runs out.
    Lsibr,
    /// Spend the whole budget on the k-th own pull (1-based).
    DeferredLump(u32),
    /// Spend `B/m` on each of the first m own pulls.
    UniformSpread(u32),
    /// Fixed per-pull manipulations, clamped to the remaining budget. Pulls
    /// past the end of the script manipulate by 0.
    Scripted(Vec<f64>),
}

impl StrategyKind {
    pub(crate) fn validate(&self) -> Result<(), ConfigError> {
        match self {
            StrategyKind::DeferredLump(0) | StrategyKind::UniformSpread(0) => Err(ConfigError::InvalidStrategy(self.to_string())),
            StrategyKind::Scripted(values) if values.iter().any(|v| !v.is_finite()) => {
                Err(ConfigError::InvalidStrategy(self.to_string()))
            }
            _ => Ok(()),
        }
    }
}

/// Descriptor syntax: `Zero`, `LSI`, `LSIBR`, `DeferredLump:<k>`,
/// `UniformSpread:<m>`, `Scripted:<a1>;<a2>;...`.
impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StrategyKind::Zero => f.write_str("Zero"),
            StrategyKind::Lsi => f.write_str("LSI"),
            StrategyKind::Lsibr => f.write_str("LSIBR"),
            StrategyKind::DeferredLump(k) => write!(f, "DeferredLump:{k}"),
            StrategyKind::UniformSpread(m) => write!(f, "UniformSpread:{m}"),
            StrategyKind::Scripted(values) => {
                f.write_str("Scripted:")?;
                for (i, v) in values.iter().enumerate() {
                    if i > 0 {
                        f.write_str(";")?;
                    }
                    write!(f, "{v}")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for StrategyKind {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let invalid = || ConfigError::InvalidStrategy(s.to_string());
        let (name, arg) = match s.trim().split_once(':') {
            Some((n, a)) => (n.trim(), Some(a.trim())),
            None => (s.trim(), None),
        };
        let count = |arg: Option<&str>| -> Result<u32, ConfigError> {
            let n: u32 = arg.ok_or_else(invalid)?.parse().map_err(|_| invalid())?;
            if n == 0 {
                return Err(invalid());
            }
            Ok(n)
        };
        let kind = match (name.to_ascii_lowercase().as_str(), arg) {
            ("zero", None) => StrategyKind::Zero,
            ("lsi", None) => StrategyKind::Lsi,
            ("lsibr", None) => StrategyKind::Lsibr,
            ("deferredlump", a) => StrategyKind::DeferredLump(count(a)?),
            ("uniformspread", a) => StrategyKind::UniformSpread(count(a)?),
            ("scripted", Some(a)) => {
                let values = if a.is_empty() {
                    Vec::new()
                } else {
                    a.split(';').map(|v| v.trim().parse::<f64>().map_err(|_| invalid())).collect::<Result<_, _>>()?
                };
                StrategyKind::Scripted(values)
            }
            _ => return Err(invalid()),
        };
        kind.validate()?;
        Ok(kind)
    }
}

/// One entry of an arm's private history.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OwnPull {
    /// 1-based count of this arm's pulls.
    pub ordinal: usize,
    pub true_reward: f64,
    pub manipulation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrategyState {
    kind: StrategyKind,
    budget_total: f64,
    budget_remaining: f64,
    history: Vec<OwnPull>,
}

impl StrategyState {
    pub fn new(kind: StrategyKind, budget: f64) -> Self {
        Self { kind, budget_total: budget, budget_remaining: budget, history: Vec::new() }
    }

    pub fn kind(&self) -> &StrategyKind {
        &self.kind
    }

    pub fn budget_total(&self) -> f64 {
        self.budget_total
    }

    pub fn budget_remaining(&self) -> f64 {
        self.budget_remaining
    }

    pub fn history(&self) -> &[OwnPull] {
        &self.history
    }

    /// Chooses the manipulation for a pull that just drew `true_reward`,
    /// records it and debits the budget.
    pub fn decide(&mut self, true_reward: f64, bounded: bool) -> Result<f64, ConfigError> {
        let ordinal = self.history.len() + 1;
        let remaining = self.budget_remaining;
        let alpha = match &self.kind {
            StrategyKind::Zero => 0.0,
            StrategyKind::Lsi => remaining,
            StrategyKind::Lsibr => {
                if !bounded {
                    return Err(ConfigError::Malformed("LSIBR requires bounded rewards".into()));
                }
                (1.0 - true_reward).max(0.0).min(remaining)
            }
            StrategyKind::DeferredLump(k) if ordinal == *k as usize => self.budget_total.min(remaining),
            StrategyKind::DeferredLump(_) => 0.0,
            StrategyKind::UniformSpread(m) if ordinal <= *m as usize => (self.budget_total / f64::from(*m)).min(remaining),
            StrategyKind::UniformSpread(_) => 0.0,
            StrategyKind::Scripted(values) => values.get(ordinal - 1).copied().unwrap_or(0.0).clamp(-remaining, remaining),
        };
        // Spending exactly what remains must leave exactly zero.
        self.budget_remaining = if alpha.abs() >= remaining { 0.0 } else { remaining - alpha.abs() };
        self.history.push(OwnPull { ordinal, true_reward, manipulation: alpha });
        Ok(alpha)
    }

    /// Signed total manipulation so far.
    pub fn cumulative_beta(&self) -> f64 {
        self.history.iter().map(|p| p.manipulation).sum()
    }

    /// Total absolute manipulation so far.
    pub fn spent(&self) -> f64 {
        self.history.iter().map(|p| p.manipulation.abs()).sum()
    }

    /// `spent + remaining == total` and `0 <= remaining <= total`, up to
    /// the budget tolerance.
    pub fn accounting_holds(&self) -> bool {
        (0.0..=self.budget_total + BUDGET_TOLERANCE).contains(&self.budget_remaining)
            && (self.spent() + self.budget_remaining - self.budget_total).abs() <= BUDGET_TOLERANCE
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn lsi_spends_everything_once() {
        let mut s = StrategyState::new(StrategyKind::Lsi, 100.0);
        assert_eq!(s.decide(3.0, false).unwrap(), 100.0);
        assert_eq!(s.cumulative_beta(), 100.0);
        assert_eq!(s.decide(3.0, false).unwrap(), 0.0);
        assert_eq!(s.budget_remaining(), 0.0);
    }

    #[test]
    fn zero_budget_never_manipulates() {
        let kinds = [
            StrategyKind::Zero,
            StrategyKind::Lsi,
            StrategyKind::Lsibr,
            StrategyKind::DeferredLump(1),
            StrategyKind::UniformSpread(3),
            StrategyKind::Scripted(vec![4.0, -2.0]),
        ];
        for kind in kinds {
            let mut s = StrategyState::new(kind.clone(), 0.0);
            for _ in 0..4 {
                assert_eq!(s.decide(0.4, true).unwrap(), 0.0, "{kind}");
            }
        }
    }

    #[test]
    fn lsibr_promotes_to_one_then_partially() {
        let mut s = StrategyState::new(StrategyKind::Lsibr, 10.0);
        let a = s.decide(0.7, true).unwrap();
        assert!((a - 0.3).abs() < 1e-12);
        assert!((s.budget_remaining() - 9.7).abs() < 1e-12);

        let mut s = StrategyState::new(StrategyKind::Lsibr, 0.1);
        assert_eq!(s.decide(0.7, true).unwrap(), 0.1);
        assert_eq!(s.budget_remaining(), 0.0);
        assert_eq!(s.decide(0.2, true).unwrap(), 0.0);
    }

    #[test]
    fn lsibr_unbounded_is_rejected() {
        let mut s = StrategyState::new(StrategyKind::Lsibr, 1.0);
        assert!(s.decide(0.5, false).is_err());
    }

    #[test]
    fn deferred_lump_fires_on_kth_pull() {
        let mut s = StrategyState::new(StrategyKind::DeferredLump(3), 50.0);
        let spent: Vec<f64> = (0..5).map(|_| s.decide(1.0, false).unwrap()).collect();
        assert_eq!(spent, vec![0.0, 0.0, 50.0, 0.0, 0.0]);
    }

    #[test]
    fn uniform_spread_splits_evenly() {
        let mut s = StrategyState::new(StrategyKind::UniformSpread(4), 10.0);
        let spent: Vec<f64> = (0..6).map(|_| s.decide(1.0, false).unwrap()).collect();
        assert_eq!(spent, vec![2.5, 2.5, 2.5, 2.5, 0.0, 0.0]);
        assert!(s.accounting_holds());
    }

    #[test]
    fn scripted_signed_sum_and_absolute_debit() {
        let mut s = StrategyState::new(StrategyKind::Scripted(vec![3.0, -2.0]), 20.0);
        s.decide(1.0, false).unwrap();
        s.decide(1.0, false).unwrap();
        assert_eq!(s.cumulative_beta(), 1.0);
        assert_eq!(s.budget_remaining(), 15.0);
    }

    #[test]
    fn scripted_is_clamped_to_remaining() {
        let mut s = StrategyState::new(StrategyKind::Scripted(vec![4.0, -9.0, 1.0]), 6.0);
        assert_eq!(s.decide(0.0, false).unwrap(), 4.0);
        assert_eq!(s.decide(0.0, false).unwrap(), -2.0);
        assert_eq!(s.decide(0.0, false).unwrap(), 0.0);
        assert_eq!(s.spent(), 6.0);
    }

    #[test]
    fn descriptor_parsing() {
        assert_eq!("LSI".parse::<StrategyKind>().unwrap(), StrategyKind::Lsi);
        assert_eq!("lsibr".parse::<StrategyKind>().unwrap(), StrategyKind::Lsibr);
        assert_eq!("DeferredLump:5".parse::<StrategyKind>().unwrap(), StrategyKind::DeferredLump(5));
        assert_eq!("UniformSpread:20".parse::<StrategyKind>().unwrap(), StrategyKind::UniformSpread(20));
        assert_eq!("Scripted:3;-2.5".parse::<StrategyKind>().unwrap(), StrategyKind::Scripted(vec![3.0, -2.5]));
        for bad in ["DeferredLump", "DeferredLump:0", "UniformSpread:x", "LSI:2", "Greedy", "Scripted:1;nan"] {
            assert!(bad.parse::<StrategyKind>().is_err(), "{bad}");
        }
        for kind in [StrategyKind::Zero, StrategyKind::DeferredLump(7), StrategyKind::Scripted(vec![1.5, -0.25])] {
            assert_eq!(kind.to_string().parse::<StrategyKind>().unwrap(), kind);
        }
    }

    fn any_kind() -> impl Strategy<Value = StrategyKind> {
        prop_oneof![
            Just(StrategyKind::Zero),
            Just(StrategyKind::Lsi),
            Just(StrategyKind::Lsibr),
            (1u32..20).prop_map(StrategyKind::DeferredLump),
            (1u32..20).prop_map(StrategyKind::UniformSpread),
            proptest::collection::vec(-50.0f64..50.0, 0..30).prop_map(StrategyKind::Scripted),
        ]
    }

    proptest! {
        #[test]
        fn budget_is_never_exceeded(kind in any_kind(), budget in 0.0f64..200.0, rewards in proptest::collection::vec(0.0f64..1.0, 1..60)) {
            let mut s = StrategyState::new(kind, budget);
            for r in rewards {
                let a = s.decide(r, true).unwrap();
                prop_assert!(r + a <= 1.0 + 1e-12 || !matches!(s.kind(), StrategyKind::Lsibr));
                prop_assert!(s.accounting_holds());
            }
            prop_assert!(s.spent() <= budget + BUDGET_TOLERANCE);
        }
    }
}
