//! Projection of a distribution over the price square onto the uniform grid,
//! and expectations of model quantities under such distributions.

use crate::env::{CellDensity, JointValuationModel, Quantity};
use crate::error::{invalid, Error, Result};
use crate::grid::{grid_coord, GridTag, PricePair};
use crate::scalar::Real;

/// A distribution over price pairs `(p, q)`.
#[derive(Debug, Clone, PartialEq)]
pub enum PriceMeasure<S> {
    Atoms(Vec<(PricePair<S>, S)>),
    /// Piecewise-constant density; the first cell index is `p`, the second `q`.
    Cells(CellDensity<S>),
}

/// Grid weights from the cell rule plus the mass no cell captured.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection<S> {
    pub tag: GridTag,
    /// Row-major weights over the `K x K` grid. They sum to `1 - residual`.
    pub weights: Vec<S>,
    pub residual: S,
}

impl<S: Real> Projection<S> {
    pub fn expectation(&self, values: &[S]) -> S {
        self.weights.iter().zip(values).map(|(w, v)| *w * *v).sum()
    }
}

/// Grid point `(p_i, q_j)` collects the mass of `(p_i - 1/K, p_i] x [q_j, q_j + 1/K)`.
///
/// The cells have width `1/K` while the grid pitch is `1/(K-1)`, so strips of
/// the square belong to no cell; their mass is returned as `residual` rather
/// than spread over the grid.
pub fn project_to_grid<S: Real>(measure: &PriceMeasure<S>, k: usize) -> Result<Projection<S>> {
    if k < 2 {
        return Err(invalid(format!(
            "grid resolution K = {k} must be at least 2"
        )));
    }
    let coords: Vec<S> = (0..k).map(|i| grid_coord(i, k)).collect();
    let width = S::one() / S::from_usize_lossy(k);
    let mut weights = vec![S::zero(); k * k];
    match measure {
        PriceMeasure::Atoms(atoms) => {
            let slack = S::lit(1e-9);
            let km1 = S::from_usize_lossy(k - 1);
            for &(at, w) in atoms {
                let i = (at.p * km1 - slack)
                    .ceil()
                    .max(S::zero())
                    .to_usize()
                    .unwrap_or(0);
                let j = (at.q * km1 + slack)
                    .floor()
                    .max(S::zero())
                    .to_usize()
                    .unwrap_or(0);
                if i < k && j < k {
                    let (pi, qj) = (coords[i], coords[j]);
                    if at.p > pi - width && at.p <= pi && at.q >= qj && at.q < qj + width {
                        weights[i * k + j] = weights[i * k + j] + w;
                    }
                }
            }
        }
        PriceMeasure::Cells(c) => {
            let m = c.order();
            let msz = S::from_usize_lossy(m);
            let edge = |a: usize| S::from_usize_lossy(a) / msz;
            // overlap lengths of every model cell with every grid cell, per axis
            let overlap = |lo: S, hi: S, a: usize| {
                let (x0, x1) = (edge(a), edge(a + 1));
                (hi.min(x1) - lo.max(x0)).max(S::zero())
            };
            for i in 0..k {
                for j in 0..k {
                    let (plo, phi) = (coords[i] - width, coords[i]);
                    let (qlo, qhi) = (coords[j], coords[j] + width);
                    let mut mass = S::zero();
                    for a in 0..m {
                        let lp = overlap(plo, phi, a);
                        if lp == S::zero() {
                            continue;
                        }
                        for b in 0..m {
                            mass = mass + c.value(a, b) * lp * overlap(qlo, qhi, b);
                        }
                    }
                    weights[i * k + j] = mass;
                }
            }
        }
    }
    let captured: S = weights.iter().copied().sum();
    Ok(Projection {
        tag: GridTag::Uniform { k },
        weights,
        residual: (S::one() - captured).max(S::zero()),
    })
}

/// Gauss-Legendre nodes and weights on `[0, 1]`; exact for degree <= 5.
fn gauss3<S: Real>() -> [(S, S); 3] {
    let h = (0.6f64).sqrt() / 2.0;
    [
        (S::lit(0.5 - h), S::lit(5.0 / 18.0)),
        (S::lit(0.5), S::lit(8.0 / 18.0)),
        (S::lit(0.5 + h), S::lit(5.0 / 18.0)),
    ]
}

/// `E_{(p,q) ~ measure}[quantity(p, q)]` under `model`.
///
/// For a density measure the integrand is a polynomial of degree at most two
/// per axis between the model's cell edges, so splitting at those edges and
/// using three Gauss points per axis is exact up to rounding.
pub fn expected_under<S: Real>(
    model: &JointValuationModel<S>,
    measure: &PriceMeasure<S>,
    quantity: Quantity,
) -> Result<S> {
    match measure {
        PriceMeasure::Atoms(atoms) => Ok(atoms
            .iter()
            .map(|&(pair, w)| w * model.exact(quantity, pair))
            .sum()),
        PriceMeasure::Cells(c) => {
            let model_edges: Vec<S> = match model {
                JointValuationModel::ProductUniform => vec![],
                JointValuationModel::CellDensity(mc) => {
                    let m = mc.order();
                    (1..m)
                        .map(|a| S::from_usize_lossy(a) / S::from_usize_lossy(m))
                        .collect()
                }
                JointValuationModel::PointMasses(_) => {
                    return Err(Error::UnsupportedOracle(
                        "integrating a price density against atoms".into(),
                    ))
                }
            };
            let m = c.order();
            let msz = S::from_usize_lossy(m);
            let pieces = |a: usize| -> Vec<(S, S)> {
                let lo = S::from_usize_lossy(a) / msz;
                let hi = S::from_usize_lossy(a + 1) / msz;
                let mut cuts = vec![lo];
                cuts.extend(model_edges.iter().copied().filter(|e| *e > lo && *e < hi));
                cuts.push(hi);
                cuts.windows(2).map(|w| (w[0], w[1])).collect()
            };
            let nodes = gauss3::<S>();
            let mut total = S::zero();
            for a in 0..m {
                let ps = pieces(a);
                for b in 0..m {
                    let d = c.value(a, b);
                    if d == S::zero() {
                        continue;
                    }
                    for &(p0, p1) in &ps {
                        for &(q0, q1) in &pieces(b) {
                            let area = (p1 - p0) * (q1 - q0);
                            let mut acc = S::zero();
                            for &(xp, wp) in &nodes {
                                for &(xq, wq) in &nodes {
                                    let pair = PricePair {
                                        p: p0 + (p1 - p0) * xp,
                                        q: q0 + (q1 - q0) * xq,
                                    };
                                    acc = acc + wp * wq * model.exact(quantity, pair);
                                }
                            }
                            total = total + d * area * acc;
                        }
                    }
                }
            }
            Ok(total)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_atom_stays_put() {
        let k = 5;
        let pair = PricePair { p: 0.25, q: 0.75 };
        let pr = project_to_grid(&PriceMeasure::Atoms(vec![(pair, 1.0)]), k).unwrap();
        assert_eq!(pr.weights[k + 3], 1.0);
        assert_eq!(pr.residual, 0.0);
    }

    #[test]
    fn nearby_atom_maps_to_its_cell() {
        let k = 5;
        let h = 1.0 / (2.0 * k as f64);
        let pair = PricePair {
            p: 0.5 - h,
            q: 0.25 + h,
        };
        let pr = project_to_grid(&PriceMeasure::Atoms(vec![(pair, 1.0)]), k).unwrap();
        assert_eq!(pr.weights[2 * k + 1], 1.0);
    }

    #[test]
    fn sliver_mass_is_residual() {
        // p = 0.22 is above 0.25 - 1/5 = 0.05 but below 0.25; p = 0.02 is in no cell
        let k = 5;
        let atoms = vec![
            (PricePair { p: 0.22f64, q: 0.5 }, 0.5),
            (PricePair { p: 0.02, q: 0.5 }, 0.5),
        ];
        let pr = project_to_grid(&PriceMeasure::Atoms(atoms), k).unwrap();
        assert_eq!(pr.weights[k + 2], 0.5);
        assert!((pr.residual - 0.5).abs() < 1e-15);
    }

    #[test]
    fn uniform_measure_coverage() {
        // covered fraction per axis is (K-1)/K
        let k = 11;
        let u = CellDensity::new(1, vec![1.0]).unwrap();
        let pr = project_to_grid(&PriceMeasure::Cells(u), k).unwrap();
        let cover = (k as f64 - 1.0) / k as f64;
        assert!((pr.residual - (1.0 - cover * cover)).abs() < 1e-12);
    }

    #[test]
    fn quadrature_matches_closed_form() {
        // E over uniform (p, q) of PRO on product-uniform valuations:
        // int int (q - p) p (1 - q) dp dq = -1/12
        let m = JointValuationModel::<f64>::ProductUniform;
        let u = CellDensity::new(1, vec![1.0]).unwrap();
        let v = expected_under(&m, &PriceMeasure::Cells(u), Quantity::Pro).unwrap();
        assert!((v + 1.0 / 12.0).abs() < 1e-14, "{v}");
    }
}
