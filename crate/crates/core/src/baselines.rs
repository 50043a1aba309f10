//! Comparator policies: a fixed strongly budget balanced price and an
//! explore-then-commit learner restricted to diagonal prices.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::env::JointValuationModel;
use crate::error::{invalid, Result};
use crate::grid::{grid_coord, PricePair};
use crate::oracle::best_fixed_sbb_price;
use crate::runlog::{simulate, Mechanism, Phase, RunLog};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Policy {
    /// Posts `(p, p)` every round.
    FixedPrice { p: f64 },
    /// The best diagonal price of a `K`-point grid, computed from exact
    /// expectations before the run.
    OracleBestFixed { k: usize },
    /// Estimates `GFT(p, p)` on the diagonal of a `K`-point grid with `N`
    /// probes per side, then commits to the best estimate.
    DiagonalEtc { k: usize, n: usize },
}

pub fn fixed_price_policy(p: f64) -> Result<Policy> {
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid(format!("fixed price {p} outside [0, 1]")));
    }
    Ok(Policy::FixedPrice { p })
}

/// Explore-then-commit on the diagonal. `horizon` only bounds the
/// exploration length `2 K N`.
pub fn diagonal_etc_policy(horizon: usize, k: usize, n: usize) -> Result<Policy> {
    if k < 2 || n == 0 {
        return Err(invalid(format!(
            "diagonal policy needs K >= 2 and N >= 1, got K = {k}, N = {n}"
        )));
    }
    if 2 * k * n > horizon {
        log::warn!(
            "diagonal exploration ({} rounds) exceeds the horizon {horizon}",
            2 * k * n
        );
    }
    Ok(Policy::DiagonalEtc { k, n })
}

/// Diagonal explore-then-commit as a [`Mechanism`].
///
/// Only the one-bit trade indicator is used. With `U ~ U[0, p]`, posting
/// `(U, p)` trades with probability `L(p, p) / p`; with `V ~ U[p, 1]`, posting
/// `(p, V)` trades with probability `R(p, p) / (1 - p)`. Both probes are
/// weakly budget balanced. After `N` probes of each kind per diagonal point
/// the policy posts `(p*, p*)` for the largest `L_hat + R_hat`, lowest price
/// on ties.
#[derive(Debug, Clone)]
pub struct DiagonalEtc {
    k: usize,
    n: usize,
    coords: Vec<f64>,
    l_hits: Vec<u32>,
    r_hits: Vec<u32>,
    round: usize,
    commit: Option<f64>,
}

impl DiagonalEtc {
    pub fn new(k: usize, n: usize) -> Result<Self> {
        if k < 2 || n == 0 {
            return Err(invalid(format!(
                "diagonal policy needs K >= 2 and N >= 1, got K = {k}, N = {n}"
            )));
        }
        Ok(Self {
            k,
            n,
            coords: (0..k).map(|i| grid_coord(i, k)).collect(),
            l_hits: vec![0; k],
            r_hits: vec![0; k],
            round: 0,
            commit: None,
        })
    }

    fn exploring(&self) -> bool {
        self.round < 2 * self.k * self.n
    }

    /// `L_hat(p, p) + R_hat(p, p)` per diagonal point.
    pub fn estimates(&self) -> Vec<f64> {
        let n = self.n as f64;
        self.coords
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                p * f64::from(self.l_hits[i]) / n + (1.0 - p) * f64::from(self.r_hits[i]) / n
            })
            .collect()
    }

    pub fn committed_price(&self) -> Option<f64> {
        self.commit
    }

    fn commit_now(&mut self) -> f64 {
        let est = self.estimates();
        let mut best = 0;
        for (i, v) in est.iter().enumerate() {
            if *v > est[best] {
                best = i;
            }
        }
        let p = self.coords[best];
        self.commit = Some(p);
        p
    }
}

impl Mechanism for DiagonalEtc {
    fn post(&mut self, rng: &mut ChaCha8Rng) -> (Phase, PricePair<f64>) {
        if !self.exploring() {
            let p = match self.commit {
                Some(p) => p,
                None => self.commit_now(),
            };
            return (Phase::Fixed, PricePair { p, q: p });
        }
        let half = self.k * self.n;
        let x: f64 = rng.random();
        let pair = if self.round < half {
            let p = self.coords[self.round / self.n];
            PricePair { p: x * p, q: p }
        } else {
            let p = self.coords[(self.round - half) / self.n];
            PricePair {
                p,
                q: p + x * (1.0 - p),
            }
        };
        (Phase::Exploration, pair)
    }

    fn observe(&mut self, bit: bool) {
        if !self.exploring() {
            return;
        }
        let half = self.k * self.n;
        if bit {
            if self.round < half {
                self.l_hits[self.round / self.n] += 1;
            } else {
                self.r_hits[(self.round - half) / self.n] += 1;
            }
        }
        self.round += 1;
    }
}

struct FixedPrice(f64);

impl Mechanism for FixedPrice {
    fn post(&mut self, _: &mut ChaCha8Rng) -> (Phase, PricePair<f64>) {
        (
            Phase::Fixed,
            PricePair {
                p: self.0,
                q: self.0,
            },
        )
    }

    fn observe(&mut self, _: bool) {}
}

pub fn evaluate_policy(
    model: &JointValuationModel<f64>,
    policy: &Policy,
    horizon: usize,
    seed: u64,
) -> Result<RunLog> {
    let mut mech: Box<dyn Mechanism> = match *policy {
        Policy::FixedPrice { p } => Box::new(FixedPrice(fixed_price_policy(p).map(|_| p)?)),
        Policy::OracleBestFixed { k } => Box::new(FixedPrice(best_fixed_sbb_price(model, k)?.0)),
        Policy::DiagonalEtc { k, n } => Box::new(DiagonalEtc::new(k, n)?),
    };
    Ok(simulate(model, mech.as_mut(), horizon, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::PointMassMixture;

    #[test]
    fn fixed_price_is_budget_neutral() {
        let m = JointValuationModel::ProductUniform;
        let log = evaluate_policy(&m, &fixed_price_policy(0.5).unwrap(), 1000, 3).unwrap();
        assert!(log
            .records
            .iter()
            .all(|r| r.realized_profit == 0.0 && r.p == r.q));
        assert!(log.records.iter().all(|r| r.expected_gft == 0.125));
        let log = evaluate_policy(&m, &fixed_price_policy(0.0).unwrap(), 10, 3).unwrap();
        assert!(log.records.iter().all(|r| r.expected_gft == 0.0));
        assert!(fixed_price_policy(1.5).is_err());
    }

    #[test]
    fn diagonal_probes_stay_weakly_balanced() {
        let m = JointValuationModel::ProductUniform;
        let pol = diagonal_etc_policy(2000, 6, 50).unwrap();
        let log = evaluate_policy(&m, &pol, 2000, 8).unwrap();
        assert!(log.records.iter().all(|r| r.p <= r.q));
        assert!(log.records[600..]
            .iter()
            .all(|r| r.p == r.q && r.phase == Phase::Fixed));
        assert_eq!(log.phase_counts(), [0, 600, 0, 1400]);
    }

    #[test]
    fn dominant_atom_commit() {
        let m =
            JointValuationModel::PointMasses(PointMassMixture::new(vec![(0.2, 0.8, 1.0)]).unwrap());
        let mut mech = DiagonalEtc::new(11, 400).unwrap();
        simulate(&m, &mut mech, 2 * 11 * 400 + 1, 5);
        let p = mech.committed_price().unwrap();
        assert!((0.2..=0.8).contains(&p), "committed to {p}");
    }

    #[test]
    fn oracle_best_fixed_uses_the_best_diagonal_point() {
        let m = JointValuationModel::ProductUniform;
        let log = evaluate_policy(&m, &Policy::OracleBestFixed { k: 101 }, 5, 0).unwrap();
        assert_eq!(log.records[0].p, 0.5);
    }
}
