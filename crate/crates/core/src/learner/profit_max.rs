//! Profit collection with Exp3-IX over a fixed set of price pairs.

use rand::Rng;

use crate::error::{invalid, Result};
use crate::grid::{AmGrid, PricePair, PriceSet};

#[derive(Debug, Clone)]
pub struct ProfitMaxState {
    arms: Vec<PricePair<f64>>,
    log_weights: Vec<f64>,
    probs: Vec<f64>,
    eta: f64,
    gamma: f64,
    target: f64,
    collected: f64,
    t: usize,
    horizon: usize,
    last: Option<usize>,
    plays: Vec<u64>,
    done: bool,
}

impl ProfitMaxState {
    /// Stops once the collected profit reaches `target` or after `horizon`
    /// posted rounds.
    pub fn new(arms: Vec<PricePair<f64>>, target: f64, horizon: usize) -> Result<Self> {
        if arms.is_empty() {
            return Err(invalid("profit collection needs at least one arm"));
        }
        if !target.is_finite() {
            return Err(invalid(format!("profit target {target} is not finite")));
        }
        let m = arms.len() as f64;
        let rate = (2.0 * m.ln() / (m * horizon.max(1) as f64)).sqrt();
        let len = arms.len();
        Ok(Self {
            arms,
            log_weights: vec![0.0; len],
            probs: vec![1.0 / m; len],
            eta: rate,
            gamma: rate,
            target,
            collected: 0.0,
            t: 0,
            horizon,
            last: None,
            plays: vec![0; len],
            done: false,
        })
    }

    pub fn from_grid(grid: &AmGrid<f64>, target: f64, horizon: usize) -> Result<Self> {
        Self::new(grid.pairs().to_vec(), target, horizon)
    }

    /// Feeds back the realized profit of the previous round and returns the
    /// next pair, or `None` once the target or the horizon is reached.
    pub fn step<R: Rng + ?Sized>(
        &mut self,
        prev_profit: Option<f64>,
        rng: &mut R,
    ) -> Option<PricePair<f64>> {
        if let (Some(profit), Some(arm)) = (prev_profit, self.last.take()) {
            self.collected += profit;
            // profit in [-1, 1] becomes a loss in [0, 1]
            let loss = ((1.0 - profit) / 2.0).clamp(0.0, 1.0);
            self.log_weights[arm] -= self.eta * loss / (self.probs[arm] + self.gamma);
            self.refresh_probs();
        }
        if self.done || self.collected >= self.target || self.t >= self.horizon {
            self.done = true;
            return None;
        }
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut arm = self.probs.len() - 1;
        for (k, p) in self.probs.iter().enumerate() {
            acc += p;
            if u < acc {
                arm = k;
                break;
            }
        }
        self.t += 1;
        self.plays[arm] += 1;
        self.last = Some(arm);
        Some(self.arms[arm])
    }

    fn refresh_probs(&mut self) {
        let max = self
            .log_weights
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        for (p, w) in self.probs.iter_mut().zip(&self.log_weights) {
            *p = (w - max).exp();
            total += *p;
        }
        for p in &mut self.probs {
            *p /= total;
        }
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    /// Cumulative realized profit `B`.
    pub fn collected(&self) -> f64 {
        self.collected
    }

    pub fn target(&self) -> f64 {
        self.target
    }

    pub fn rounds(&self) -> usize {
        self.t
    }

    pub fn rate(&self) -> f64 {
        self.eta
    }

    pub fn arms(&self) -> &[PricePair<f64>] {
        &self.arms
    }

    pub fn play_counts(&self) -> &[u64] {
        &self.plays
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }
}
