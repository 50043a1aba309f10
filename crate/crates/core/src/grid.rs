//! Price pairs, the uniform grid, the additive-multiplicative grid and
//! probability vectors over grid points.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::scalar::Real;

/// Seller price `p` and buyer price `q`, both in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct PricePair<S> {
    pub p: S,
    pub q: S,
}

impl<S: Real> PricePair<S> {
    pub fn new(p: S, q: S) -> Result<Self> {
        let unit = |x: S| x >= S::zero() && x <= S::one();
        if !unit(p) || !unit(q) {
            return Err(invalid(format!("price pair ({p}, {q}) outside [0,1]^2")));
        }
        Ok(Self { p, q })
    }

    /// Budget-balance margin `q - p` collected when a trade happens.
    #[inline]
    pub fn spread(&self) -> S {
        self.q - self.p
    }

    #[inline]
    pub fn is_diagonal(&self) -> bool {
        self.p == self.q
    }
}

/// Identifies the point set a [`GridDistribution`] lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GridTag {
    Uniform {
        k: usize,
    },
    AdditiveMultiplicative {
        k: usize,
        horizon: usize,
    },
    /// Arbitrary finite point list, identified by its length only.
    Custom {
        len: usize,
    },
}

/// Common view over the finite price sets used by the learner and oracles.
pub trait PriceSet<S> {
    fn tag(&self) -> GridTag;
    fn pairs(&self) -> &[PricePair<S>];

    fn len(&self) -> usize {
        self.pairs().len()
    }

    fn is_empty(&self) -> bool {
        self.pairs().is_empty()
    }
}

/// `K x K` grid with coordinates `i / (K - 1)`, stored row-major:
/// `index(i, j) = i * K + j` is the pair `(i/(K-1), j/(K-1))`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<S> {
    k: usize,
    coords: Vec<S>,
    points: Vec<PricePair<S>>,
}

/// Coordinate `i / (K - 1)` as stored in every grid.
#[inline]
pub fn grid_coord<S: Real>(i: usize, k: usize) -> S {
    S::from_usize_lossy(i) / S::from_usize_lossy(k - 1)
}

pub fn make_uniform_grid<S: Real>(k: usize) -> Result<Grid<S>> {
    if k < 2 {
        return Err(invalid(format!(
            "grid resolution K = {k} must be at least 2"
        )));
    }
    let coords: Vec<S> = (0..k).map(|i| grid_coord(i, k)).collect();
    let mut points = Vec::with_capacity(k * k);
    for &p in &coords {
        for &q in &coords {
            points.push(PricePair { p, q });
        }
    }
    Ok(Grid { k, coords, points })
}

impl<S: Real> Grid<S> {
    pub fn k(&self) -> usize {
        self.k
    }

    /// The `K` axis values `0, 1/(K-1), ..., 1`.
    pub fn coords(&self) -> &[S] {
        &self.coords
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.k + j
    }

    /// Inverse of [`Grid::index`].
    #[inline]
    pub fn cell(&self, index: usize) -> (usize, usize) {
        (index / self.k, index % self.k)
    }

    #[inline]
    pub fn point(&self, i: usize, j: usize) -> PricePair<S> {
        self.points[self.index(i, j)]
    }

    /// Indices of the `K` budget-balanced points `(x, x)`.
    pub fn diagonal_indices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.k).map(move |i| self.index(i, i))
    }
}

impl<S: Real> PriceSet<S> for Grid<S> {
    fn tag(&self) -> GridTag {
        GridTag::Uniform { k: self.k }
    }

    fn pairs(&self) -> &[PricePair<S>] {
        &self.points
    }
}

/// Near-diagonal pairs `(x - 2^-i, x)` and `(x, x + 2^-i)` anchored on the
/// diagonal of the uniform grid, `0 <= i <= ceil(log2 T)`, restricted to the
/// unit square. Sorted by `(p, q)` and deduplicated.
#[derive(Debug, Clone, PartialEq)]
pub struct AmGrid<S> {
    k: usize,
    horizon: usize,
    pairs: Vec<PricePair<S>>,
}

/// `ceil(log2 n)` for `n >= 1`.
pub fn ceil_log2(n: usize) -> u32 {
    if n <= 1 {
        0
    } else {
        (n - 1).ilog2() + 1
    }
}

pub fn make_am_grid<S: Real>(k: usize, horizon: usize) -> Result<AmGrid<S>> {
    if k < 2 {
        return Err(invalid(format!(
            "grid resolution K = {k} must be at least 2"
        )));
    }
    if horizon < 2 {
        return Err(invalid(format!("horizon T = {horizon} must be at least 2")));
    }
    let max_exp = ceil_log2(horizon);
    let mut pairs = Vec::with_capacity(2 * k * (max_exp as usize + 1));
    for a in 0..k {
        let anchor: S = grid_coord(a, k);
        for i in 0..=max_exp {
            let spread = S::lit(0.5f64.powi(i as i32));
            // (anchor - 2^-i, anchor) and (anchor, anchor + 2^-i)
            let below = anchor - spread;
            if below >= S::zero() {
                pairs.push(PricePair {
                    p: below,
                    q: anchor,
                });
            }
            let above = anchor + spread;
            if above <= S::one() {
                pairs.push(PricePair {
                    p: anchor,
                    q: above,
                });
            }
        }
    }
    pairs.sort_by(|a, b| a.partial_cmp(b).expect("finite coordinates"));
    // Near-equal p values need not be adjacent after sorting, so compare
    // against every kept pair. The grid holds O(K log T) pairs.
    let mut kept: Vec<PricePair<S>> = Vec::with_capacity(pairs.len());
    for pair in pairs {
        if !kept.iter().any(|x| near(x.p, pair.p) && near(x.q, pair.q)) {
            kept.push(pair);
        }
    }
    Ok(AmGrid {
        k,
        horizon,
        pairs: kept,
    })
}

// Pairs generated from different anchors can differ by a rounding step.
fn near<S: Real>(a: S, b: S) -> bool {
    (a - b).abs() <= S::lit(1e-12).max(S::epsilon() * S::lit(4.0))
}

impl<S: Real> AmGrid<S> {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Upper bound `2 K (ceil(log2 T) + 1)` on the number of pairs.
    pub fn size_bound(&self) -> usize {
        2 * self.k * (ceil_log2(self.horizon) as usize + 1)
    }
}

impl<S: Real> PriceSet<S> for AmGrid<S> {
    fn tag(&self) -> GridTag {
        GridTag::AdditiveMultiplicative {
            k: self.k,
            horizon: self.horizon,
        }
    }

    fn pairs(&self) -> &[PricePair<S>] {
        &self.pairs
    }
}

/// Probability vector over the points of a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridDistribution<S> {
    tag: GridTag,
    weights: Vec<S>,
}

fn mass_tolerance<S: Real>(len: usize) -> S {
    S::lit(1e-12).max(S::epsilon() * S::from_usize_lossy(8 * len.max(1)))
}

impl<S: Real> GridDistribution<S> {
    pub fn from_weights(tag: GridTag, weights: Vec<S>) -> Result<Self> {
        if weights.is_empty() {
            return Err(invalid("distribution over an empty grid"));
        }
        if let Some(w) = weights.iter().find(|w| w.is_nan() || **w < S::zero()) {
            return Err(invalid(format!("negative or NaN weight {w}")));
        }
        let total: S = weights.iter().copied().sum();
        if (total - S::one()).abs() > mass_tolerance::<S>(weights.len()) {
            return Err(invalid(format!("weights sum to {total}, not 1")));
        }
        Ok(Self { tag, weights })
    }

    pub fn point_mass(tag: GridTag, len: usize, index: usize) -> Result<Self> {
        if index >= len {
            return Err(invalid(format!(
                "index {index} out of range for {len} points"
            )));
        }
        let mut weights = vec![S::zero(); len];
        weights[index] = S::one();
        Ok(Self { tag, weights })
    }

    pub fn uniform(tag: GridTag, len: usize) -> Result<Self> {
        if len == 0 {
            return Err(invalid("distribution over an empty grid"));
        }
        let w = S::one() / S::from_usize_lossy(len);
        Ok(Self {
            tag,
            weights: vec![w; len],
        })
    }

    pub fn tag(&self) -> GridTag {
        self.tag
    }

    pub fn weights(&self) -> &[S] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn total_mass(&self) -> S {
        self.weights.iter().copied().sum()
    }

    /// Indices carrying positive weight, ascending.
    pub fn support(&self) -> Vec<usize> {
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, w)| **w > S::zero())
            .map(|(i, _)| i)
            .collect()
    }

    /// `sum_i weight_i * values_i`.
    pub fn expectation(&self, values: &[S]) -> S {
        debug_assert_eq!(values.len(), self.weights.len());
        self.weights.iter().zip(values).map(|(w, v)| *w * *v).sum()
    }
}

/// `(1 - alpha) * d1 + alpha * d2` on a shared grid.
pub fn mix<S: Real>(
    d1: &GridDistribution<S>,
    d2: &GridDistribution<S>,
    alpha: S,
) -> Result<GridDistribution<S>> {
    if d1.tag != d2.tag || d1.len() != d2.len() {
        return Err(Error::IncompatibleGrid(format!(
            "{:?} ({} points) vs {:?} ({} points)",
            d1.tag,
            d1.len(),
            d2.tag,
            d2.len()
        )));
    }
    if !(alpha >= S::zero() && alpha <= S::one()) {
        return Err(invalid(format!("mixing weight {alpha} outside [0,1]")));
    }
    let keep = S::one() - alpha;
    let weights = d1
        .weights
        .iter()
        .zip(&d2.weights)
        .map(|(a, b)| keep * *a + alpha * *b)
        .collect();
    Ok(GridDistribution {
        tag: d1.tag,
        weights,
    })
}
