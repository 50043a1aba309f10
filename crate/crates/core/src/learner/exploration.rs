//! Uniform-probe estimation of `L` and `R` on every grid point.

use rand::Rng;

use crate::error::{invalid, Result};
use crate::grid::{grid_coord, PricePair};

/// Rows first: for each `q_j` (ascending) post `(U, q_j)` `N` times and, on a
/// trade, credit `L(p_i, q_j)` for every `p_i >= U`. Then columns: for each
/// `p_i` post `(p_i, V)` and credit `R(p_i, q_j)` for every `q_j <= V`.
#[derive(Debug, Clone)]
pub struct ExplorationState {
    k: usize,
    n: usize,
    coords: Vec<f64>,
    l_counts: Vec<u32>,
    r_counts: Vec<u32>,
    round: usize,
    probe: Option<f64>,
}

impl ExplorationState {
    pub fn new(k: usize, n: usize) -> Result<Self> {
        if k < 2 || n == 0 {
            return Err(invalid(format!(
                "exploration needs K >= 2 and N >= 1, got K = {k}, N = {n}"
            )));
        }
        Ok(Self {
            k,
            n,
            coords: (0..k).map(|i| grid_coord(i, k)).collect(),
            l_counts: vec![0; k * k],
            r_counts: vec![0; k * k],
            round: 0,
            probe: None,
        })
    }

    /// Always `2 K N`.
    pub fn total_rounds(&self) -> usize {
        2 * self.k * self.n
    }

    pub fn rounds(&self) -> usize {
        self.round
    }

    pub fn is_done(&self) -> bool {
        self.round >= self.total_rounds() && self.probe.is_none()
    }

    /// Consumes the trade bit of the previous probe and returns the next one,
    /// or `None` after `2 K N` probes.
    pub fn step<R: Rng + ?Sized>(
        &mut self,
        prev_bit: Option<bool>,
        rng: &mut R,
    ) -> Option<PricePair<f64>> {
        if let Some(x) = self.probe.take() {
            if prev_bit == Some(true) {
                self.credit(self.round - 1, x);
            }
        }
        if self.round >= self.total_rounds() {
            return None;
        }
        let x: f64 = rng.random();
        let half = self.k * self.n;
        let pair = if self.round < half {
            PricePair {
                p: x,
                q: self.coords[self.round / self.n],
            }
        } else {
            PricePair {
                p: self.coords[(self.round - half) / self.n],
                q: x,
            }
        };
        self.probe = Some(x);
        self.round += 1;
        Some(pair)
    }

    fn credit(&mut self, round: usize, x: f64) {
        let (k, half) = (self.k, self.k * self.n);
        if round < half {
            let j = round / self.n;
            for (i, &p) in self.coords.iter().enumerate() {
                if p >= x {
                    self.l_counts[i * k + j] += 1;
                }
            }
        } else {
            let i = (round - half) / self.n;
            for (j, &q) in self.coords.iter().enumerate() {
                if q <= x {
                    self.r_counts[i * k + j] += 1;
                }
            }
        }
    }

    /// Trade counts behind `L_hat`, row-major over the grid.
    pub fn l_counts(&self) -> &[u32] {
        &self.l_counts
    }

    pub fn r_counts(&self) -> &[u32] {
        &self.r_counts
    }

    pub fn l_hat(&self) -> Vec<f64> {
        let n = self.n as f64;
        self.l_counts.iter().map(|c| f64::from(*c) / n).collect()
    }

    pub fn r_hat(&self) -> Vec<f64> {
        let n = self.n as f64;
        self.r_counts.iter().map(|c| f64::from(*c) / n).collect()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }
}
