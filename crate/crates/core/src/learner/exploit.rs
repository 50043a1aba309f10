//! Optimistic constrained play on the uniform grid.

use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::grid::{make_uniform_grid, Grid, GridDistribution, PricePair, PriceSet};
use crate::oracle::{envelope_cmp, envelope_order, solve_with_envelope_order, LpSolution};

#[derive(Debug, Clone, PartialEq)]
enum Mixture {
    Uniform,
    Sparse(Vec<(usize, f64)>),
}

#[derive(Debug, Clone)]
pub struct ExploitState {
    grid: Grid<f64>,
    l_bar: Vec<f64>,
    r_bar: Vec<f64>,
    visits: Vec<u64>,
    profit_sums: Vec<f64>,
    opt_profit: Vec<f64>,
    rewards: Vec<f64>,
    order: Vec<usize>,
    mixture: Mixture,
    log_term: f64,
    last: Option<usize>,
    rounds: usize,
    violations: usize,
    last_slack: f64,
}

/// Inputs of the exploit phase.
#[derive(Debug, Clone, Copy)]
pub struct ExploitConfig {
    pub k: usize,
    pub n: usize,
    pub horizon: usize,
    pub delta: f64,
    /// Constant `C` in the profit confidence term `ln(C T K^2 / delta)`.
    pub confidence_constant: f64,
}

impl ExploitConfig {
    /// Bonus `sqrt(ln(4 K^2 / delta) / N)` added to both estimate tables.
    pub fn estimate_bonus(&self) -> f64 {
        let k2 = (self.k * self.k) as f64;
        ((4.0 * k2 / self.delta).ln() / self.n as f64).sqrt()
    }

    pub fn profit_log_term(&self) -> f64 {
        let k2 = (self.k * self.k) as f64;
        (self.confidence_constant * self.horizon as f64 * k2 / self.delta).ln()
    }
}

impl ExploitState {
    pub fn new(cfg: ExploitConfig, l_hat: &[f64], r_hat: &[f64]) -> Result<Self> {
        let grid = make_uniform_grid::<f64>(cfg.k)?;
        let len = grid.len();
        if l_hat.len() != len || r_hat.len() != len {
            return Err(invalid(format!(
                "estimate tables need {len} entries, got {} and {}",
                l_hat.len(),
                r_hat.len()
            )));
        }
        if !(cfg.delta > 0.0 && cfg.delta < 1.0) || cfg.n == 0 || cfg.confidence_constant <= 0.0 {
            return Err(invalid(
                "exploit phase needs delta in (0,1), N >= 1 and C > 0",
            ));
        }
        let bonus = cfg.estimate_bonus();
        let l_bar: Vec<f64> = l_hat.iter().map(|v| v + bonus).collect();
        let r_bar: Vec<f64> = r_hat.iter().map(|v| v + bonus).collect();
        let opt_profit = vec![1.0; len];
        let rewards: Vec<f64> = (0..len).map(|k| l_bar[k] + r_bar[k] + 1.0).collect();
        let order = envelope_order(&rewards, &opt_profit);
        Ok(Self {
            grid,
            l_bar,
            r_bar,
            visits: vec![0; len],
            profit_sums: vec![0.0; len],
            opt_profit,
            rewards,
            order,
            mixture: Mixture::Uniform,
            log_term: cfg.profit_log_term(),
            last: None,
            rounds: 0,
            violations: 0,
            last_slack: 1.0,
        })
    }

    /// Empirical mean profit plus `min{1, sqrt(2 ln(C T K^2 / delta) / N_t)}`,
    /// or 1 for a pair never played.
    pub fn optimistic_profit(&self, index: usize) -> f64 {
        optimistic(self.visits[index], self.profit_sums[index], self.log_term)
    }

    /// Optimum of the optimistic LP for the current estimates, or the diagonal
    /// fallback (flagged `true`) when every optimistic profit is negative.
    pub fn solve_optimistic_lp(&self) -> (LpSolution<f64>, bool) {
        match solve_with_envelope_order(&self.rewards, &self.opt_profit, &self.order) {
            Ok(sol) => (sol, false),
            Err(Error::Infeasible) => {
                let mut best = None::<usize>;
                for d in self.grid.diagonal_indices() {
                    if best.is_none_or(|b| self.opt_profit[d] > self.opt_profit[b]) {
                        best = Some(d);
                    }
                }
                let d = best.expect("grid has a diagonal");
                let sol = LpSolution {
                    support: vec![(d, 1.0)],
                    objective: self.rewards[d],
                    constraint_slack: self.opt_profit[d],
                };
                (sol, true)
            }
            Err(e) => unreachable!("well-formed LP: {e}"),
        }
    }

    /// Records the realized profit of the previous round, re-solves the LP
    /// and samples the next pair. The first call plays the uniform mixture.
    pub fn step<R: Rng + ?Sized>(
        &mut self,
        prev_profit: Option<f64>,
        rng: &mut R,
    ) -> PricePair<f64> {
        if let (Some(profit), Some(idx)) = (prev_profit, self.last.take()) {
            self.visits[idx] += 1;
            self.profit_sums[idx] += profit;
            self.opt_profit[idx] = self.optimistic_profit(idx);
            self.rewards[idx] = self.l_bar[idx] + self.r_bar[idx] + self.opt_profit[idx];
            self.reorder(idx);
            let (sol, fallback) = self.solve_optimistic_lp();
            if fallback {
                self.violations += 1;
                log::debug!("optimistic LP infeasible at exploit round {}", self.rounds);
            }
            self.last_slack = sol.constraint_slack;
            self.mixture = Mixture::Sparse(sol.support);
        }
        let u: f64 = rng.random();
        let idx = match &self.mixture {
            Mixture::Uniform => ((u * self.grid.len() as f64) as usize).min(self.grid.len() - 1),
            Mixture::Sparse(support) => {
                let mut acc = 0.0;
                let mut pick = support[support.len() - 1].0;
                for &(k, w) in support {
                    acc += w;
                    if u < acc {
                        pick = k;
                        break;
                    }
                }
                pick
            }
        };
        self.last = Some(idx);
        self.rounds += 1;
        self.grid.pairs()[idx]
    }

    fn reorder(&mut self, idx: usize) {
        let pos = self
            .order
            .iter()
            .position(|&k| k == idx)
            .expect("index in order");
        self.order.remove(pos);
        let (r, c) = (&self.rewards, &self.opt_profit);
        let at = self
            .order
            .partition_point(|&k| envelope_cmp(r, c, k, idx) == std::cmp::Ordering::Less);
        self.order.insert(at, idx);
    }

    pub fn current_distribution(&self) -> GridDistribution<f64> {
        let tag = self.grid.tag();
        match &self.mixture {
            Mixture::Uniform => GridDistribution::uniform(tag, self.grid.len()),
            Mixture::Sparse(support) => {
                let mut w = vec![0.0; self.grid.len()];
                for &(k, x) in support {
                    w[k] = x;
                }
                GridDistribution::from_weights(tag, w)
            }
        }
        .expect("valid mixture")
    }

    pub fn grid(&self) -> &Grid<f64> {
        &self.grid
    }

    pub fn l_bar(&self) -> &[f64] {
        &self.l_bar
    }

    pub fn r_bar(&self) -> &[f64] {
        &self.r_bar
    }

    pub fn visits(&self) -> &[u64] {
        &self.visits
    }

    pub fn profit_sums(&self) -> &[f64] {
        &self.profit_sums
    }

    /// `L_bar + R_bar + PRO_bar` per grid index.
    pub fn rewards(&self) -> &[f64] {
        &self.rewards
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    /// Times the optimistic LP was infeasible and the diagonal fallback used.
    pub fn violations(&self) -> usize {
        self.violations
    }

    /// `sum gamma * PRO_bar` of the most recently constructed mixture.
    pub fn last_constraint_slack(&self) -> f64 {
        self.last_slack
    }
}

fn optimistic(visits: u64, sum: f64, log_term: f64) -> f64 {
    if visits == 0 {
        return 1.0;
    }
    let n = visits as f64;
    sum / n + (2.0 * log_term / n).sqrt().min(1.0)
}
