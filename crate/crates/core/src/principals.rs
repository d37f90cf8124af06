//! The three principals (UCB, epsilon-greedy, Thompson sampling).
//!
//! A principal only ever sees the arm it pulled and the reward that was
//! reported back, which already includes whatever the arm added to it. It
//! keeps per-arm pull counts and sums of those observed rewards, nothing more.
//! The first `K` rounds pull each arm once in order; afterwards the arm with
//! the largest index wins, ties going to the lowest arm.

use std::fmt;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{ConfigError, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PrincipalKind {
    Ucb,
    /// Exploration rate `min{1, cK/t}`.
    EpsGreedy { c: f64 },
    ThompsonSampling,
}

impl PrincipalKind {
    /// Short stable name used in CSV output and file names.
    pub fn name(&self) -> &'static str {
        match self {
            PrincipalKind::Ucb => "ucb",
            PrincipalKind::EpsGreedy { .. } => "eps_greedy",
            PrincipalKind::ThompsonSampling => "thompson",
        }
    }

    pub fn is_randomized(&self) -> bool {
        !matches!(self, PrincipalKind::Ucb)
    }

    pub(crate) fn validate(&self) -> Result<(), ConfigError> {
        match *self {
            PrincipalKind::EpsGreedy { c } if !(c.is_finite() && c > 0.0) => {
                Err(ConfigError::InvalidPrincipal(format!("epsilon-greedy constant c must be > 0, got {c}")))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for PrincipalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which logarithm sits inside the UCB confidence width.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConfidenceWidth {
    /// `3 sigma sqrt(ln T / n)`, constant over rounds.
    #[default]
    Horizon,
    /// `3 sigma sqrt(ln t / n)`.
    Elapsed,
}

/// Source of algorithmic randomness for the randomized principals.
pub trait PolicyRng {
    /// Uniform draw from [0, 1).
    fn unit(&mut self) -> f64;
    /// Uniform draw from `0..n`.
    fn index(&mut self, n: usize) -> usize;
    fn standard_normal(&mut self) -> f64;
}

impl<R: Rng> PolicyRng for R {
    fn unit(&mut self) -> f64 {
        self.random::<f64>()
    }

    fn index(&mut self, n: usize) -> usize {
        self.random_range(0..n)
    }

    fn standard_normal(&mut self) -> f64 {
        self.sample(StandardNormal)
    }
}

/// Exploration probability of epsilon-greedy at round `t`.
pub fn eps_schedule(t: usize, c: f64, num_arms: usize) -> f64 {
    (c * num_arms as f64 / t as f64).min(1.0)
}

/// Everything the principal knows, plus its own random stream.
#[derive(Debug, Clone)]
pub struct PrincipalState<R> {
    /// Round about to be played, 1-based.
    t: usize,
    counts: Vec<u64>,
    sum_observed: Vec<f64>,
    horizon: usize,
    sigma: f64,
    kind: PrincipalKind,
    width: ConfidenceWidth,
    rng: R,
}

impl<R: PolicyRng> PrincipalState<R> {
    pub fn new(num_arms: usize, horizon: usize, sigma: f64, kind: PrincipalKind, width: ConfidenceWidth, rng: R) -> Self {
        Self {
            t: 1,
            counts: vec![0; num_arms],
            sum_observed: vec![0.0; num_arms],
            horizon,
            sigma,
            kind,
            width,
            rng,
        }
    }

    pub fn round(&self) -> usize {
        self.t
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn sum_observed(&self) -> &[f64] {
        &self.sum_observed
    }

    pub fn num_arms(&self) -> usize {
        self.counts.len()
    }

    pub fn kind(&self) -> PrincipalKind {
        self.kind
    }

    /// Average observed (manipulated) reward of `arm`; `None` before its
    /// first pull.
    pub fn observed_mean(&self, arm: usize) -> Option<f64> {
        match self.counts[arm] {
            0 => None,
            n => Some(self.sum_observed[arm] / n as f64),
        }
    }

    /// UCB index of `arm` for the current round.
    pub fn ucb_index(&self, arm: usize) -> f64 {
        let n = self.counts[arm] as f64;
        let log_term = match self.width {
            ConfidenceWidth::Horizon => (self.horizon as f64).ln(),
            ConfidenceWidth::Elapsed => (self.t as f64).ln(),
        };
        self.sum_observed[arm] / n + 3.0 * self.sigma * (log_term / n).sqrt()
    }

    /// Forced pull during the first `K` rounds, `None` afterwards.
    fn initialization(&self) -> Result<Option<usize>> {
        if self.t > self.horizon {
            return Err(Error::RoundOutOfRange { t: self.t, horizon: self.horizon });
        }
        Ok((self.t <= self.num_arms()).then(|| self.t - 1))
    }

    pub fn select_ucb(&self) -> Result<usize> {
        if let Some(arm) = self.initialization()? {
            return Ok(arm);
        }
        Ok(argmax((0..self.num_arms()).map(|i| self.ucb_index(i))))
    }

    pub fn select_eps_greedy(&mut self, c: f64) -> Result<usize> {
        if let Some(arm) = self.initialization()? {
            return Ok(arm);
        }
        let eps = eps_schedule(self.t, c, self.num_arms());
        if self.rng.unit() < eps {
            return Ok(self.rng.index(self.num_arms()));
        }
        Ok(argmax((0..self.num_arms()).map(|i| self.sum_observed[i] / self.counts[i] as f64)))
    }

    /// Samples `theta_i ~ N(observed mean, 1/n_i)` per arm and returns the
    /// arm with the largest sample.
    pub fn select_ts(&mut self) -> Result<usize> {
        if let Some(arm) = self.initialization()? {
            return Ok(arm);
        }
        let samples: Vec<f64> = (0..self.num_arms())
            .map(|i| {
                let n = self.counts[i] as f64;
                self.sum_observed[i] / n + self.rng.standard_normal() / n.sqrt()
            })
            .collect();
        Ok(argmax(samples))
    }

    pub fn select(&mut self) -> Result<usize> {
        match self.kind {
            PrincipalKind::Ucb => self.select_ucb(),
            PrincipalKind::EpsGreedy { c } => self.select_eps_greedy(c),
            PrincipalKind::ThompsonSampling => self.select_ts(),
        }
    }

    /// Records the reward observed for the arm pulled this round.
    pub fn update(&mut self, arm: usize, observed: f64) {
        self.counts[arm] += 1;
        self.sum_observed[arm] += observed;
        self.t += 1;
    }
}

/// Index of the largest value; the first one wins ties.
pub(crate) fn argmax(values: impl IntoIterator<Item = f64>) -> usize {
    let mut best = 0;
    let mut best_value = f64::NEG_INFINITY;
    for (i, v) in values.into_iter().enumerate() {
        if v > best_value {
            best = i;
            best_value = v;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::VecDeque;

    /// Replays scripted draws; panics if a draw was not scripted.
    #[derive(Default)]
    struct Scripted {
        units: VecDeque<f64>,
        indices: VecDeque<usize>,
        normals: VecDeque<f64>,
    }

    impl PolicyRng for Scripted {
        fn unit(&mut self) -> f64 {
            self.units.pop_front().expect("unscripted unit draw")
        }
        fn index(&mut self, _n: usize) -> usize {
            self.indices.pop_front().expect("unscripted index draw")
        }
        fn standard_normal(&mut self) -> f64 {
            self.normals.pop_front().expect("unscripted normal draw")
        }
    }

    fn state(kind: PrincipalKind, k: usize, horizon: usize, sigma: f64) -> PrincipalState<Scripted> {
        PrincipalState::new(k, horizon, sigma, kind, ConfidenceWidth::Horizon, Scripted::default())
    }

    fn seed(state: &mut PrincipalState<Scripted>, observed: &[f64]) {
        for (arm, &r) in observed.iter().enumerate() {
            state.update(arm, r);
        }
    }

    #[test]
    fn initialization_round_robin() {
        let mut s = state(PrincipalKind::Ucb, 3, 10, 1.0);
        s.update(0, 1.0);
        assert_eq!(s.select_ucb().unwrap(), 1);
        for kind in [PrincipalKind::EpsGreedy { c: 1.0 }, PrincipalKind::ThompsonSampling] {
            let mut s = state(kind, 3, 10, 1.0);
            for expected in 0..3 {
                let arm = s.select().unwrap();
                assert_eq!(arm, expected);
                s.update(arm, 0.0);
            }
        }
    }

    #[test]
    fn ucb_hand_computed_indices() {
        let mut s = state(PrincipalKind::Ucb, 2, 16, 1.0);
        seed(&mut s, &[1.0, 0.5]);
        assert!((s.ucb_index(0) - (1.0 + 3.0 * 16f64.ln().sqrt())).abs() < 1e-12);
        assert!((s.ucb_index(0) - 5.9953).abs() < 1e-3);
        assert!((s.ucb_index(1) - 5.4953).abs() < 1e-3);
        assert_eq!(s.select_ucb().unwrap(), 0);
    }

    #[test]
    fn ucb_tie_goes_to_lowest_arm() {
        let mut s = state(PrincipalKind::Ucb, 2, 16, 1.0);
        seed(&mut s, &[0.7, 0.7]);
        assert_eq!(s.select_ucb().unwrap(), 0);
        assert_eq!(s.select_ucb().unwrap(), 0);
    }

    #[test]
    fn ucb_elapsed_width_variant() {
        let mut s = PrincipalState::new(2, 100, 1.0, PrincipalKind::Ucb, ConfidenceWidth::Elapsed, Scripted::default());
        seed(&mut s, &[1.0, 0.0]);
        assert!((s.ucb_index(1) - 3.0 * 3f64.ln().sqrt()).abs() < 1e-12);
    }

    #[test]
    fn round_past_horizon_is_an_error() {
        let mut s = state(PrincipalKind::Ucb, 2, 2, 1.0);
        seed(&mut s, &[1.0, 0.0]);
        assert!(matches!(s.select_ucb(), Err(Error::RoundOutOfRange { t: 3, horizon: 2 })));
    }

    #[test]
    fn eps_schedule_values() {
        assert_eq!(eps_schedule(8, 4.0 / 3.0, 3), 0.5);
        assert_eq!(eps_schedule(2, 4.0 / 3.0, 3), 1.0);
        assert!((eps_schedule(200, 20.0 / 3.0, 3) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn eps_greedy_forced_exploration() {
        let mut s = state(PrincipalKind::EpsGreedy { c: 1.0 }, 3, 100, 1.0);
        seed(&mut s, &[5.0, 1.0, 1.0]);
        s.rng.units.push_back(0.0);
        s.rng.indices.push_back(1);
        assert_eq!(s.select().unwrap(), 1);
    }

    #[test]
    fn eps_greedy_forced_exploitation() {
        let mut s = state(PrincipalKind::EpsGreedy { c: 1.0 }, 3, 100, 1.0);
        seed(&mut s, &[1.0, 0.5, 2.0]);
        s.rng.units.push_back(0.999);
        assert_eq!(s.select().unwrap(), 2);
    }

    #[test]
    fn eps_greedy_exploration_frequency() {
        // eps_4 = min{1, 2*2/8} = 0.5 at t = 8 with K = 2, c = 2.
        let mut s = PrincipalState::new(2, 100, 1.0, PrincipalKind::EpsGreedy { c: 2.0 }, ConfidenceWidth::Horizon, ChaCha8Rng::seed_from_u64(11));
        for i in 0..7 {
            s.update(i % 2, if i % 2 == 0 { 1.0 } else { 0.0 });
        }
        assert_eq!(eps_schedule(s.round(), 2.0, 2), 0.5);
        // Exploitation always returns arm 0; exploration returns arm 1 half
        // of the time, so arm 1 shows up with probability eps / 2.
        let draws = 100_000;
        let arm1 = (0..draws).filter(|_| s.select_eps_greedy(2.0).unwrap() == 1).count();
        let explore_rate = 2.0 * arm1 as f64 / draws as f64;
        assert!((explore_rate - 0.5).abs() < 0.01, "{explore_rate}");
    }

    #[test]
    fn ts_argmax_of_stubbed_samples() {
        let mut s = state(PrincipalKind::ThompsonSampling, 3, 100, 1.0);
        seed(&mut s, &[0.0, 0.0, 0.0]);
        s.rng.normals.extend([5.2, 8.1, 9.7]);
        assert_eq!(s.select().unwrap(), 2);
    }

    #[test]
    fn ts_single_arm() {
        let mut s = state(PrincipalKind::ThompsonSampling, 1, 10, 1.0);
        assert_eq!(s.select().unwrap(), 0);
        s.update(0, 3.0);
        s.rng.normals.push_back(-0.3);
        assert_eq!(s.select().unwrap(), 0);
    }

    #[test]
    fn ts_variance_is_one_over_n_regardless_of_sigma() {
        for sigma in [0.1, 1.0, 7.0] {
            let mut s = state(PrincipalKind::ThompsonSampling, 2, 1000, sigma);
            for _ in 0..4 {
                s.update(0, 2.0);
            }
            s.update(1, 3.0);
            // theta_0 = 2 + z/2, theta_1 = 3 + z; z = (2, 0) gives (3, 3): tie -> arm 0.
            s.rng.normals.extend([2.0, 0.0]);
            assert_eq!(s.select_ts().unwrap(), 0);
            s.rng.normals.extend([1.999, 0.0]);
            assert_eq!(s.select_ts().unwrap(), 1);
        }
    }

    #[test]
    fn ts_concentrates_on_best_arm() {
        let n = 10_000u64;
        let mut s = PrincipalState::new(3, 100_000, 0.0, PrincipalKind::ThompsonSampling, ConfidenceWidth::Horizon, ChaCha8Rng::seed_from_u64(4));
        for (arm, mean) in [5.0, 8.0, 10.0].into_iter().enumerate() {
            for _ in 0..n {
                s.update(arm, mean);
            }
        }
        let hits = (0..10_000).filter(|_| s.select_ts().unwrap() == 2).count();
        assert!(hits as f64 / 10_000.0 >= 0.99);
    }

    #[test]
    fn update_tracks_counts_and_sums() {
        let mut s = state(PrincipalKind::Ucb, 2, 10, 1.0);
        seed(&mut s, &[1.0, 0.5]);
        s.update(0, 2.0);
        assert_eq!(s.counts(), &[2, 1]);
        assert_eq!(s.sum_observed(), &[3.0, 0.5]);
        assert_eq!(s.round(), 4);
        assert_eq!(s.observed_mean(0), Some(1.5));
    }

    #[test]
    fn argmax_first_wins() {
        assert_eq!(argmax([1.0, 3.0, 3.0, 2.0]), 1);
        assert_eq!(argmax([f64::NEG_INFINITY; 2]), 0);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn observed_mean_is_running_mean(rewards in proptest::collection::vec((0usize..3, -50.0f64..50.0), 1..200)) {
                let mut s = state(PrincipalKind::Ucb, 3, 1000, 1.0);
                for &(arm, r) in &rewards {
                    s.update(arm, r);
                }
                prop_assert_eq!(s.counts().iter().sum::<u64>() as usize, rewards.len());
                prop_assert_eq!(s.round(), rewards.len() + 1);
                for arm in 0..3 {
                    let mine: Vec<f64> = rewards.iter().filter(|(a, _)| *a == arm).map(|(_, r)| *r).collect();
                    match s.observed_mean(arm) {
                        None => prop_assert!(mine.is_empty()),
                        Some(m) => {
                            let oracle = mine.iter().sum::<f64>() / mine.len() as f64;
                            prop_assert!((m - oracle).abs() < 1e-9);
                        }
                    }
                }
            }
        }
    }
}
