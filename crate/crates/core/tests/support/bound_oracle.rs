//! Stand-alone evaluation of the closed-form bounds from raw scalars.
//!
//! Deliberately shares no code with the library: every quantity is
//! recomputed from means, budgets, sigma and the horizon.

#![allow(dead_code)]

use std::f64::consts::PI;

pub struct Setting {
    pub means: Vec<f64>,
    pub budgets: Vec<f64>,
    pub sigma: f64,
    pub horizon: f64,
}

impl Setting {
    pub fn new(means: &[f64], budgets: &[f64], sigma: f64, horizon: u64) -> Self {
        Setting { means: means.to_vec(), budgets: budgets.to_vec(), sigma, horizon: horizon as f64 }
    }

    fn best(&self) -> f64 {
        self.means.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn gap(&self, i: usize) -> f64 {
        self.best() - self.means[i]
    }

    /// Indices of arms with a positive gap.
    pub fn losers(&self) -> Vec<usize> {
        (0..self.means.len()).filter(|&i| self.gap(i) > 0.0).collect()
    }

    pub fn min_gap(&self) -> f64 {
        self.losers().iter().map(|&i| self.gap(i)).fold(f64::INFINITY, f64::min)
    }

    fn ln_t(&self) -> f64 {
        self.horizon.ln()
    }

    fn k(&self) -> f64 {
        self.means.len() as f64
    }

    fn lump_term(&self) -> f64 {
        let mut total = 0.0;
        for i in self.losers() {
            total += self.budgets[i] / (2.0 * self.gap(i));
        }
        total
    }
}

pub fn ucb_pulls(s: &Setting, i: usize) -> f64 {
    let d = s.gap(i);
    let c = if 3.0 * s.budgets[i] / d > 81.0 * s.sigma.powi(2) * s.ln_t() / (d * d) {
        3.0 * s.budgets[i] / d
    } else {
        81.0 * s.sigma.powi(2) * s.ln_t() / (d * d)
    };
    c + 3.0
}

pub fn ucb_regret(s: &Setting) -> f64 {
    let mut r = 0.0;
    for i in s.losers() {
        r += s.gap(i) * ucb_pulls(s, i);
    }
    r
}

pub fn ucb_best_arm_pulls(s: &Setting) -> f64 {
    s.horizon - s.lump_term() + 36.0 * s.sigma.powi(2) * s.ln_t() / s.min_gap().powi(2) + 1.0 + 2.0 * (s.k() - 1.0) / s.horizon
}

pub fn lsi_regret_floor(s: &Setting) -> f64 {
    s.min_gap() * (s.horizon - ucb_best_arm_pulls(s))
}

pub fn eps_pulls(s: &Setting, i: usize, c: f64) -> f64 {
    let d = s.gap(i);
    let m = (c * s.k()).floor();
    let lr = (s.horizon / m).ln();
    1.0 + 3.0 * s.budgets[i] / d
        + m / s.k()
        + c * lr
        + (m - s.k()) * 2.0 * (m + 1.0) * (m + 1.0) * PI * PI / 3.0
        + (m + 1.0) * (c + 18.0 * s.sigma.powi(2) / (d * d)) * lr
}

pub fn ts_pulls(s: &Setting, i: usize) -> f64 {
    let d = s.gap(i);
    let v = s.sigma.powi(2);
    let head = f64::max(6.0 * s.budgets[i] / d, 72.0 * v * s.ln_t() / (d * d));
    let l = (72.0 * (s.horizon * d * d).ln() * v.max(1.0) / (d * d)).max(0.0);
    let geometric = ((11.0 * v / 4.0).exp() + PI * PI / 3.0) * l.ceil() + 4.0 / (d * d);
    let mean_part = f64::max(6.0 * s.budgets[i] / d, 144.0 * v * s.ln_t() / (d * d)) + 1.0;
    head + 1.0 + (18.0 * s.ln_t() / (d * d) + 1.0) + geometric + mean_part
}
