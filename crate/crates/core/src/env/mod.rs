//! Valuation models, one-bit feedback and exact expectations.
//!
//! Every supported model reduces the four per-pair expectations (gain from
//! trade, profit, `L`, `R`) to three moments of the trade event
//! `{s <= p, b >= q}`: its probability, `E[s; trade]` and `E[b; trade]`.

pub(crate) mod io;
mod moments;
mod needle;

pub use io::{parse_instance, serialize_instance};
pub use moments::TradeMoments;
pub use needle::{make_needle_instance, NeedleInstance, NeedleRegion};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::grid::PricePair;
use crate::scalar::Real;

/// Piecewise-constant joint density on an `M x M` partition of the unit
/// square. `density[a * M + c]` is the value on
/// `[a/M, (a+1)/M) x [c/M, (c+1)/M)` (seller cell `a`, buyer cell `c`).
#[derive(Debug, Clone, PartialEq)]
pub struct CellDensity<S> {
    m: usize,
    density: Vec<S>,
    sigma: S,
    cumulative: Vec<f64>,
}

impl<S: Real> CellDensity<S> {
    /// Builds the model with the declared bound set to the largest cell value.
    pub fn new(m: usize, density: Vec<S>) -> Result<Self> {
        let sigma = density.iter().copied().fold(S::zero(), S::max);
        Self::with_sigma(m, density, sigma)
    }

    pub fn with_sigma(m: usize, density: Vec<S>, sigma: S) -> Result<Self> {
        if m == 0 {
            return Err(invalid("cell-density needs at least one cell per axis"));
        }
        if density.len() != m * m {
            return Err(invalid(format!(
                "cell-density of order {m} needs {} values, got {}",
                m * m,
                density.len()
            )));
        }
        if let Some(d) = density.iter().find(|d| **d < S::zero() || !d.is_finite()) {
            return Err(invalid(format!(
                "cell density {d} is negative or not finite"
            )));
        }
        if let Some(d) = density.iter().find(|d| **d > sigma) {
            return Err(invalid(format!(
                "cell density {d} exceeds declared bound {sigma}"
            )));
        }
        let cell_area = 1.0 / (m * m) as f64;
        let total: f64 = density.iter().map(|d| d.as_f64() * cell_area).sum();
        let tol = 1e-12f64.max(S::epsilon().as_f64() * 8.0 * (m * m) as f64);
        if (total - 1.0).abs() > tol {
            return Err(invalid(format!(
                "cell densities integrate to {total}, not 1"
            )));
        }
        let mut acc = 0.0;
        let cumulative = density
            .iter()
            .map(|d| {
                acc += d.as_f64() * cell_area;
                acc
            })
            .collect();
        Ok(Self {
            m,
            density,
            sigma,
            cumulative,
        })
    }

    /// Cells per axis.
    pub fn order(&self) -> usize {
        self.m
    }

    pub fn densities(&self) -> &[S] {
        &self.density
    }

    pub fn value(&self, seller_cell: usize, buyer_cell: usize) -> S {
        self.density[seller_cell * self.m + buyer_cell]
    }

    pub fn sigma(&self) -> S {
        self.sigma
    }
}

/// Finite mixture of point masses `((s, b), mass)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointMassMixture<S> {
    atoms: Vec<(PricePair<S>, S)>,
    cumulative: Vec<f64>,
}

impl<S: Real> PointMassMixture<S> {
    /// Atoms are `(seller value, buyer value, mass)`.
    pub fn new(atoms: Vec<(S, S, S)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(invalid("point-mass mixture needs at least one atom"));
        }
        let mut out = Vec::with_capacity(atoms.len());
        for (s, b, w) in atoms {
            let at = PricePair::new(s, b)
                .map_err(|_| invalid(format!("atom ({s}, {b}) outside [0,1]^2")))?;
            if w.is_nan() || w < S::zero() {
                return Err(invalid(format!("atom mass {w} is negative")));
            }
            out.push((at, w));
        }
        let total: f64 = out.iter().map(|(_, w)| w.as_f64()).sum();
        let tol = 1e-12f64.max(S::epsilon().as_f64() * 8.0 * out.len() as f64);
        if (total - 1.0).abs() > tol {
            return Err(invalid(format!("atom masses sum to {total}, not 1")));
        }
        let mut acc = 0.0;
        let cumulative = out
            .iter()
            .map(|(_, w)| {
                acc += w.as_f64();
                acc
            })
            .collect();
        Ok(Self {
            atoms: out,
            cumulative,
        })
    }

    /// Atoms as `((s, b), mass)`; the pair fields are seller and buyer values.
    pub fn atoms(&self) -> &[(PricePair<S>, S)] {
        &self.atoms
    }
}

/// Joint distribution of `(seller value, buyer value)` on the unit square.
#[derive(Debug, Clone, PartialEq)]
pub enum JointValuationModel<S> {
    CellDensity(CellDensity<S>),
    PointMasses(PointMassMixture<S>),
    /// Independent uniform seller and buyer values.
    ProductUniform,
}

/// Which per-pair expectation to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quantity {
    /// `E[(b - s) 1{trade}]`
    Gft,
    /// `E[(q - p) 1{trade}]`
    Pro,
    /// `E[(p - s) 1{trade}]`
    L,
    /// `E[(b - q) 1{trade}]`
    R,
}

impl Quantity {
    pub const ALL: [Quantity; 4] = [Quantity::Gft, Quantity::Pro, Quantity::L, Quantity::R];

    /// Per-sample value of the quantity for one valuation draw.
    pub fn per_sample<S: Real>(self, s: S, b: S, pair: PricePair<S>) -> S {
        if !one_bit_feedback(s, b, pair) {
            return S::zero();
        }
        match self {
            Quantity::Gft => b - s,
            Quantity::Pro => pair.q - pair.p,
            Quantity::L => pair.p - s,
            Quantity::R => b - pair.q,
        }
    }
}

/// The trade indicator `1{s <= p} 1{b >= q}`; ties trade.
#[inline]
pub fn one_bit_feedback<S: Real>(s: S, b: S, pair: PricePair<S>) -> bool {
    s <= pair.p && b >= pair.q
}

impl<S: Real> JointValuationModel<S> {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Self::CellDensity(_) => "cell-density",
            Self::PointMasses(_) => "point-mass-mixture",
            Self::ProductUniform => "product-uniform",
        }
    }

    /// Certified upper bound on the joint density; infinite for atoms.
    pub fn density_bound(&self) -> S {
        match self {
            Self::CellDensity(c) => c.sigma,
            Self::PointMasses(_) => S::infinity(),
            Self::ProductUniform => S::one(),
        }
    }

    /// Draws one `(s, b)` pair.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (S, S) {
        match self {
            Self::ProductUniform => {
                let s: f64 = rng.random();
                let b: f64 = rng.random();
                (S::lit(s), S::lit(b))
            }
            Self::CellDensity(c) => {
                let idx = categorical(&c.cumulative, rng.random());
                let (a, col) = (idx / c.m, idx % c.m);
                let m = c.m as f64;
                let s = (a as f64 + rng.random::<f64>()) / m;
                let b = (col as f64 + rng.random::<f64>()) / m;
                (S::lit(s), S::lit(b))
            }
            Self::PointMasses(pm) => {
                let idx = categorical(&pm.cumulative, rng.random());
                let (at, _) = pm.atoms[idx];
                (at.p, at.q)
            }
        }
    }

    /// Probability and first moments of the trade event at `pair`.
    pub fn trade_moments(&self, pair: PricePair<S>) -> TradeMoments<S> {
        match self {
            Self::ProductUniform => moments::uniform_square(pair),
            Self::CellDensity(c) => moments::cell_density(c, pair),
            Self::PointMasses(pm) => moments::point_masses(pm.atoms(), pair),
        }
    }

    pub fn exact(&self, quantity: Quantity, pair: PricePair<S>) -> S {
        self.trade_moments(pair).quantity(quantity, pair)
    }

    pub fn exact_gft(&self, pair: PricePair<S>) -> S {
        self.exact(Quantity::Gft, pair)
    }

    pub fn exact_pro(&self, pair: PricePair<S>) -> S {
        self.exact(Quantity::Pro, pair)
    }

    pub fn exact_l(&self, pair: PricePair<S>) -> S {
        self.exact(Quantity::L, pair)
    }

    pub fn exact_r(&self, pair: PricePair<S>) -> S {
        self.exact(Quantity::R, pair)
    }
}

fn categorical(cumulative: &[f64], u: f64) -> usize {
    let total = *cumulative.last().expect("nonempty");
    let target = u * total;
    // first index whose cumulative mass exceeds the target, skipping empty cells
    let idx = cumulative.partition_point(|c| *c <= target);
    idx.min(cumulative.len() - 1)
}
