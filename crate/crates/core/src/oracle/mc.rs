use rand::Rng;

use crate::env::{JointValuationModel, Quantity};
use crate::grid::PricePair;
use crate::scalar::Real;

/// Confidence level of the reported half-width.
const FAILURE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    /// Hoeffding half-width `sqrt(ln(2/0.01) / (2n))` for values in a unit
    /// range.
    pub half_width: f64,
    pub samples: usize,
}

impl McEstimate {
    pub fn contains(&self, value: f64) -> bool {
        (self.mean - value).abs() <= self.half_width
    }
}

pub fn hoeffding_half_width(n: usize) -> f64 {
    ((2.0 / FAILURE).ln() / (2.0 * n as f64)).sqrt()
}

/// Empirical mean of the per-sample quantity over `n` fresh draws.
pub fn mc_estimate<S: Real, R: Rng + ?Sized>(
    model: &JointValuationModel<S>,
    pair: PricePair<S>,
    quantity: Quantity,
    n: usize,
    rng: &mut R,
) -> McEstimate {
    let n = n.max(1);
    let mut acc = 0.0f64;
    for _ in 0..n {
        let (s, b) = model.sample(rng);
        acc += quantity.per_sample(s, b, pair).as_f64();
    }
    McEstimate {
        mean: acc / n as f64,
        half_width: hoeffding_half_width(n),
        samples: n,
    }
}
