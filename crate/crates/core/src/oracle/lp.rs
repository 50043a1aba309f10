//! `max sum_k g_k r_k` over the probability simplex subject to the single
//! constraint `sum_k g_k c_k >= 0`.
//!
//! With one linear constraint some optimum is supported on at most two points.
//! If a reward-maximising index is feasible on its own it is the answer.
//! Otherwise the value is the upper concave envelope of the points `(c_k, r_k)`
//! evaluated at `c = 0`, attained by mixing one negative-profit index with one
//! nonnegative-profit index so that the constraint is tight.
//!
//! Both solvers return the same canonical optimum: a feasible reward maximiser
//! with the lowest index when one exists, otherwise the optimal mixture with
//! the lowest nonnegative-profit index, then the lowest negative-profit index.

use crate::error::{Error, Result};
use crate::grid::{GridDistribution, GridTag};
use crate::scalar::{LpScalar, Real};

/// Sparse optimum of the constrained simplex LP.
#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution<S> {
    /// `(index, weight)` with positive weights, at most two entries,
    /// ascending by index.
    pub support: Vec<(usize, S)>,
    pub objective: S,
    /// `sum g_k c_k`; zero for a tight mixture.
    pub constraint_slack: S,
}

impl<S: LpScalar> LpSolution<S> {
    fn point(k: usize, rewards: &[S], profits: &[S]) -> Self {
        Self {
            support: vec![(k, S::one())],
            objective: rewards[k].clone(),
            constraint_slack: profits[k].clone(),
        }
    }

    /// Tight mixture of `neg` (profit < 0) and `pos` (profit > 0).
    fn tight(neg: usize, pos: usize, rewards: &[S], profits: &[S]) -> Self {
        let (ci, cj) = (profits[neg].clone(), profits[pos].clone());
        let denom = cj.clone() - ci.clone();
        let wi = cj.clone() / denom.clone();
        let wj = S::zero() - ci.clone() / denom;
        let objective = wi.clone() * rewards[neg].clone() + wj.clone() * rewards[pos].clone();
        let constraint_slack = wi.clone() * ci + wj.clone() * cj;
        let mut support = vec![(neg, wi), (pos, wj)];
        support.sort_by_key(|(k, _)| *k);
        Self {
            support,
            objective,
            constraint_slack,
        }
    }

    pub fn indices(&self) -> Vec<usize> {
        self.support.iter().map(|(k, _)| *k).collect()
    }
}

fn check_inputs<S: LpScalar>(rewards: &[S], profits: &[S]) -> Result<()> {
    if rewards.is_empty() || rewards.len() != profits.len() {
        return Err(Error::InvalidParameter(format!(
            "LP needs equal nonempty coefficient vectors, got {} rewards and {} profits",
            rewards.len(),
            profits.len()
        )));
    }
    if !profits.iter().any(|c| *c >= S::zero()) {
        return Err(Error::Infeasible);
    }
    Ok(())
}

/// Lowest-index reward maximiser that is feasible alone, if any.
fn feasible_argmax<S: LpScalar>(rewards: &[S], profits: &[S]) -> Option<usize> {
    let mut best = &rewards[0];
    for r in rewards {
        if r > best {
            best = r;
        }
    }
    (0..rewards.len()).find(|&k| rewards[k] == *best && profits[k] >= S::zero())
}

/// Envelope-based solver, `O(M log M)`.
pub fn solve_constrained_simplex_lp<S: LpScalar>(
    rewards: &[S],
    profits: &[S],
) -> Result<LpSolution<S>> {
    check_inputs(rewards, profits)?;
    let order = envelope_order(rewards, profits);
    solve_sorted(rewards, profits, &order)
}

/// Indices sorted by profit ascending, then reward descending, then index. Callers that
/// change one coefficient at a time can keep this order up to date and call
/// [`solve_with_envelope_order`], which is linear in `M`.
pub fn envelope_order<S: LpScalar>(rewards: &[S], profits: &[S]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..profits.len()).collect();
    order.sort_by(|&a, &b| envelope_cmp(rewards, profits, a, b));
    order
}

pub fn envelope_cmp<S: LpScalar>(
    rewards: &[S],
    profits: &[S],
    a: usize,
    b: usize,
) -> std::cmp::Ordering {
    profits[a]
        .partial_cmp(&profits[b])
        .expect("comparable profits")
        .then_with(|| {
            rewards[b]
                .partial_cmp(&rewards[a])
                .expect("comparable rewards")
        })
        .then(a.cmp(&b))
}

/// Same as [`solve_constrained_simplex_lp`] given an order from
/// [`envelope_order`].
pub fn solve_with_envelope_order<S: LpScalar>(
    rewards: &[S],
    profits: &[S],
    order: &[usize],
) -> Result<LpSolution<S>> {
    check_inputs(rewards, profits)?;
    debug_assert_eq!(order.len(), rewards.len());
    solve_sorted(rewards, profits, order)
}

fn solve_sorted<S: LpScalar>(
    rewards: &[S],
    profits: &[S],
    order: &[usize],
) -> Result<LpSolution<S>> {
    if let Some(k) = feasible_argmax(rewards, profits) {
        return Ok(LpSolution::point(k, rewards, profits));
    }

    let (hull_neg, hull_pos) = crossing_edge(rewards, profits, order);
    let zero = S::zero();
    let value = if profits[hull_pos] == zero {
        rewards[hull_pos].clone()
    } else {
        LpSolution::tight(hull_neg, hull_pos, rewards, profits).objective
    };

    // Dual price: the smallest lambda with r_i + lambda c_i <= value for
    // every negative-profit i. Indices touching the supporting line are the
    // ones an optimal mixture may use.
    let mut lambda: Option<S> = None;
    for (k, c) in profits.iter().enumerate() {
        if *c < zero {
            let l = (rewards[k].clone() - value.clone()) / (zero.clone() - c.clone());
            if lambda.as_ref().is_none_or(|m| l > *m) {
                lambda = Some(l);
            }
        }
    }
    let lambda = lambda.expect("a reward maximiser has negative profit");

    for (j, c) in profits.iter().enumerate() {
        if *c == zero && rewards[j] == value {
            return Ok(LpSolution::point(j, rewards, profits));
        }
        if *c > zero && (value.clone() - rewards[j].clone()) / c.clone() == lambda {
            let i = (0..profits.len())
                .find(|&i| {
                    profits[i] < zero
                        && (rewards[i].clone() - value.clone())
                            / (zero.clone() - profits[i].clone())
                            == lambda
                })
                .expect("the maximising index touches the supporting line");
            return Ok(LpSolution::tight(i, j, rewards, profits));
        }
    }
    // Rounding broke the equalities; the envelope edge itself is optimal.
    Ok(if profits[hull_pos] == zero {
        LpSolution::point(hull_pos, rewards, profits)
    } else {
        LpSolution::tight(hull_neg, hull_pos, rewards, profits)
    })
}

/// Endpoints of the upper-envelope edge that crosses `c = 0`, as
/// `(negative-profit index, nonnegative-profit index)`.
fn crossing_edge<S: LpScalar>(rewards: &[S], profits: &[S], order: &[usize]) -> (usize, usize) {
    // Monotone chain, upper hull: drop the middle point while it is not
    // strictly above the chord. For equal profits only the first (highest
    // reward) index can be on the envelope.
    let mut hull: Vec<usize> = Vec::with_capacity(order.len());
    for &k in order {
        if hull.last().is_some_and(|&l| profits[l] == profits[k]) {
            continue;
        }
        while hull.len() >= 2 {
            let (o, a) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (profits[a].clone() - profits[o].clone())
                * (rewards[k].clone() - rewards[o].clone())
                - (rewards[a].clone() - rewards[o].clone())
                    * (profits[k].clone() - profits[o].clone());
            if cross >= S::zero() {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(k);
    }
    let zero = S::zero();
    let pos = hull
        .iter()
        .position(|&k| profits[k] >= zero)
        .expect("feasible problem has a nonnegative profit");
    assert!(pos > 0, "leftmost envelope point has negative profit");
    (hull[pos - 1], hull[pos])
}

/// Reference solver: scans every nonnegative-profit index `j` (ascending)
/// and every negative-profit partner `i` (ascending), keeping strict
/// improvements. `O(M^2)`.
pub fn solve_by_pair_enumeration<S: LpScalar>(
    rewards: &[S],
    profits: &[S],
) -> Result<LpSolution<S>> {
    check_inputs(rewards, profits)?;
    let zero = S::zero();
    let mut best: Option<LpSolution<S>> = None;
    let consider = |cand: LpSolution<S>, best: &mut Option<LpSolution<S>>| {
        if best.as_ref().is_none_or(|b| cand.objective > b.objective) {
            *best = Some(cand);
        }
    };
    for j in 0..profits.len() {
        if profits[j] < zero {
            continue;
        }
        consider(LpSolution::point(j, rewards, profits), &mut best);
        if profits[j] == zero {
            continue;
        }
        for i in 0..profits.len() {
            if profits[i] < zero && rewards[i] > rewards[j] {
                consider(LpSolution::tight(i, j, rewards, profits), &mut best);
            }
        }
    }
    Ok(best.expect("at least one feasible index"))
}

/// LP optimum expressed as a distribution over a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstrainedLpResult<S> {
    pub distribution: GridDistribution<S>,
    pub objective: S,
    pub support: Vec<usize>,
    pub constraint_slack: S,
}

impl<S: Real> ConstrainedLpResult<S> {
    pub fn from_solution(tag: GridTag, len: usize, sol: LpSolution<S>) -> Result<Self> {
        let mut weights = vec![S::zero(); len];
        for &(k, w) in &sol.support {
            weights[k] = w;
        }
        Ok(Self {
            distribution: GridDistribution::from_weights(tag, weights)?,
            objective: sol.objective,
            support: sol.indices(),
            constraint_slack: sol.constraint_slack,
        })
    }
}

/// Solves the LP for coefficients indexed by the points of a grid.
pub fn solve_on_grid<S: Real>(
    tag: GridTag,
    rewards: &[S],
    profits: &[S],
) -> Result<ConstrainedLpResult<S>> {
    let sol = solve_constrained_simplex_lp(rewards, profits)?;
    ConstrainedLpResult::from_solution(tag, rewards.len(), sol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    type Q = Ratio<i64>;

    fn q(n: i64, d: i64) -> Q {
        Ratio::new(n, d)
    }

    #[test]
    fn feasible_argmax_is_a_point_mass() {
        let s = solve_constrained_simplex_lp(&[1.0, 0.0], &[1.0, 1.0]).unwrap();
        assert_eq!(s.support, vec![(0, 1.0)]);
        assert_eq!(s.objective, 1.0);
    }

    #[test]
    fn tight_mixture_of_two() {
        let s = solve_constrained_simplex_lp(&[q(1, 1), q(0, 1)], &[q(-1, 1), q(1, 1)]).unwrap();
        assert_eq!(s.support, vec![(0, q(1, 2)), (1, q(1, 2))]);
        assert_eq!(s.objective, q(1, 2));
        assert_eq!(s.constraint_slack, q(0, 1));
    }

    #[test]
    fn three_arm_example_against_direct_mixtures() {
        let r = [q(9, 10), q(1, 2), q(1, 10)];
        let c = [q(-1, 1), q(-1, 10), q(1, 1)];
        let s = solve_constrained_simplex_lp(&r, &c).unwrap();
        // mixing index 1 with index 2: weight 10/11 on index 1, value 51/110
        // mixing index 0 with index 2: weight 1/2 each, value 1/2
        assert_eq!(s.objective, q(1, 2));
        assert_eq!(s.support, vec![(0, q(1, 2)), (2, q(1, 2))]);
        assert_eq!(s, solve_by_pair_enumeration(&r, &c).unwrap());
    }

    #[test]
    fn zero_profit_index_can_be_optimal_alone() {
        // (c, r): (-1, 2), (0, 1), (1, -5): the envelope at 0 is the point (0, 1)
        let r = [q(2, 1), q(1, 1), q(-5, 1)];
        let c = [q(-1, 1), q(0, 1), q(1, 1)];
        let s = solve_constrained_simplex_lp(&r, &c).unwrap();
        assert_eq!(s.support, vec![(1, q(1, 1))]);
        assert_eq!(s, solve_by_pair_enumeration(&r, &c).unwrap());
    }

    #[test]
    fn ties_prefer_lowest_indices() {
        // indices 1 and 3 are copies of 0 and 2
        let r = [q(3, 1), q(3, 1), q(1, 1), q(1, 1)];
        let c = [q(-1, 1), q(-1, 1), q(1, 1), q(1, 1)];
        let s = solve_constrained_simplex_lp(&r, &c).unwrap();
        assert_eq!(s.indices(), vec![0, 2]);
        let r = [q(1, 1), q(1, 1)];
        let c = [q(0, 1), q(2, 1)];
        assert_eq!(
            solve_constrained_simplex_lp(&r, &c).unwrap().indices(),
            vec![0]
        );
    }

    #[test]
    fn infeasible_and_malformed() {
        assert!(matches!(
            solve_constrained_simplex_lp(&[1.0, 2.0], &[-1.0, -0.5]),
            Err(Error::Infeasible)
        ));
        assert!(solve_constrained_simplex_lp::<f64>(&[], &[]).is_err());
        assert!(solve_constrained_simplex_lp(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn grid_result_carries_a_distribution() {
        let tag = GridTag::Custom { len: 3 };
        let res = solve_on_grid(tag, &[1.0f64, 0.0, 0.2], &[-1.0, 1.0, -3.0]).unwrap();
        assert_eq!(res.support, vec![0, 1]);
        assert!((res.distribution.total_mass() - 1.0).abs() < 1e-15);
        assert!((res.objective - 0.5).abs() < 1e-15);
        assert!(res.constraint_slack.abs() < 1e-15);
    }
}
