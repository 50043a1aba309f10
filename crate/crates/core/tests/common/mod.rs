#![allow(dead_code)]

use gbb_core::env::{CellDensity, JointValuationModel, PointMassMixture};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Cell density of order `m` with independent cell weights in `[0, 1)`,
/// normalized to integrate to one.
pub fn random_cell_density(rng: &mut impl Rng, m: usize) -> JointValuationModel<f64> {
    let raw: Vec<f64> = (0..m * m).map(|_| rng.random::<f64>() + 1e-3).collect();
    let total: f64 = raw.iter().sum::<f64>() / (m * m) as f64;
    let d = raw.into_iter().map(|w| w / total).collect();
    JointValuationModel::CellDensity(CellDensity::new(m, d).unwrap())
}

/// `n` atoms anywhere in the unit square with random masses.
pub fn random_point_masses(rng: &mut impl Rng, n: usize) -> JointValuationModel<f64> {
    let raw: Vec<(f64, f64, f64)> = (0..n)
        .map(|_| (rng.random(), rng.random(), rng.random::<f64>() + 1e-3))
        .collect();
    let total: f64 = raw.iter().map(|a| a.2).sum();
    let atoms = raw.into_iter().map(|(s, b, w)| (s, b, w / total)).collect();
    JointValuationModel::PointMasses(PointMassMixture::new(atoms).unwrap())
}

/// Atoms with `s <= b`, so every trade has nonnegative surplus.
pub fn random_ordered_point_masses(rng: &mut impl Rng, n: usize) -> JointValuationModel<f64> {
    let raw: Vec<(f64, f64, f64)> = (0..n)
        .map(|_| {
            let (x, y): (f64, f64) = (rng.random(), rng.random());
            (x.min(y), x.max(y), rng.random::<f64>() + 1e-3)
        })
        .collect();
    let total: f64 = raw.iter().map(|a| a.2).sum();
    let atoms = raw.into_iter().map(|(s, b, w)| (s, b, w / total)).collect();
    JointValuationModel::PointMasses(PointMassMixture::new(atoms).unwrap())
}

/// Product-uniform plus a few random cell densities and atom mixtures.
pub fn battery(seed: u64) -> Vec<JointValuationModel<f64>> {
    let mut r = rng(seed);
    let mut out = vec![JointValuationModel::ProductUniform];
    for m in [1, 2, 3, 5] {
        out.push(random_cell_density(&mut r, m));
    }
    for n in [1, 3, 7] {
        out.push(random_point_masses(&mut r, n));
    }
    out
}

/// Slope of least squares through `(x, y)`.
pub fn ols_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
