//! Benchmarks computed from exact expectations: the constrained LP, grid and
//! continuum optima, grid projection, the best strongly budget balanced price
//! and Monte-Carlo cross-checks.

mod lp;
mod mc;
mod projection;

pub use lp::{
    envelope_cmp, envelope_order, solve_by_pair_enumeration, solve_constrained_simplex_lp,
    solve_on_grid, solve_with_envelope_order, ConstrainedLpResult, LpSolution,
};
pub use mc::{hoeffding_half_width, mc_estimate, McEstimate};
pub use projection::{expected_under, project_to_grid, PriceMeasure, Projection};

use crate::env::JointValuationModel;
use crate::error::{Error, Result};
use crate::grid::{make_uniform_grid, Grid, GridDistribution, PricePair, PriceSet};
use crate::scalar::Real;

/// Default resolution of the reference grid.
pub const DEFAULT_K_REF: usize = 501;

/// Exact gains from trade and profits at every point of a price set.
pub fn grid_payoffs<S: Real, G: PriceSet<S> + ?Sized>(
    model: &JointValuationModel<S>,
    set: &G,
) -> (Vec<S>, Vec<S>) {
    set.pairs()
        .iter()
        .map(|&pair| {
            let m = model.trade_moments(pair);
            (
                m.quantity(crate::env::Quantity::Gft, pair),
                m.quantity(crate::env::Quantity::Pro, pair),
            )
        })
        .unzip()
}

/// Best expected gain from trade over distributions on `grid` with
/// nonnegative expected profit.
pub fn opt_k<S: Real>(
    model: &JointValuationModel<S>,
    grid: &Grid<S>,
) -> Result<(S, GridDistribution<S>)> {
    let (gft, pro) = grid_payoffs(model, grid);
    let res = solve_on_grid(grid.tag(), &gft, &pro)?;
    Ok((res.objective, res.distribution))
}

/// Grid optimum on a fine grid, used as the regret benchmark for models with
/// a bounded density.
pub fn reference_opt<S: Real>(model: &JointValuationModel<S>, k_ref: usize) -> Result<S> {
    if !model.density_bound().is_finite() {
        return Err(Error::UnsupportedBenchmark(format!(
            "{} has no density bound; the grid optimum is not a certified benchmark",
            model.kind_name()
        )));
    }
    let grid = make_uniform_grid(k_ref)?;
    opt_k(model, &grid).map(|(v, _)| v)
}

/// Weighted price pairs.
pub type PairSupport<S> = Vec<(PricePair<S>, S)>;

/// Exact continuum optimum for a finite mixture of atoms.
///
/// The trade set of `(p, q)` only depends on which atoms satisfy `s <= p` and
/// `b >= q`. Lowering `p` to the largest such seller value and raising `q` to
/// the smallest such buyer value keeps the trade set and can only increase
/// profit, so an optimum is supported on `p in {0} U {s_k}`,
/// `q in {1} U {b_k}`.
pub fn point_mass_opt<S: Real>(model: &JointValuationModel<S>) -> Result<(S, PairSupport<S>)> {
    let JointValuationModel::PointMasses(pm) = model else {
        return Err(Error::UnsupportedBenchmark(format!(
            "exact continuum optimum needs atoms, got {}",
            model.kind_name()
        )));
    };
    let mut ps: Vec<S> = std::iter::once(S::zero())
        .chain(pm.atoms().iter().map(|(a, _)| a.p))
        .collect();
    let mut qs: Vec<S> = std::iter::once(S::one())
        .chain(pm.atoms().iter().map(|(a, _)| a.q))
        .collect();
    for v in [&mut ps, &mut qs] {
        v.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        v.dedup();
    }
    let pairs: Vec<PricePair<S>> = ps
        .iter()
        .flat_map(|&p| qs.iter().map(move |&q| PricePair { p, q }))
        .collect();
    let (gft, pro): (Vec<S>, Vec<S>) = pairs
        .iter()
        .map(|&pair| (model.exact_gft(pair), model.exact_pro(pair)))
        .unzip();
    let sol = solve_constrained_simplex_lp(&gft, &pro)?;
    let support = sol.support.iter().map(|&(k, w)| (pairs[k], w)).collect();
    Ok((sol.objective, support))
}

/// Per-round benchmark: the exact optimum for atoms, the reference grid
/// optimum otherwise.
pub fn benchmark_opt<S: Real>(model: &JointValuationModel<S>, k_ref: usize) -> Result<S> {
    match model {
        JointValuationModel::PointMasses(_) => point_mass_opt(model).map(|(v, _)| v),
        _ => reference_opt(model, k_ref),
    }
}

/// Diagonal grid price with the largest gain from trade; lowest price on ties.
pub fn best_fixed_sbb_price<S: Real>(model: &JointValuationModel<S>, k: usize) -> Result<(S, S)> {
    let grid = make_uniform_grid::<S>(k)?;
    let mut best = (S::zero(), S::neg_infinity());
    for &x in grid.coords() {
        let v = model.exact_gft(PricePair { p: x, q: x });
        if v > best.1 {
            best = (x, v);
        }
    }
    Ok(best)
}

/// Largest exact profit over a price set, with its index.
pub fn max_profit_on<S: Real, G: PriceSet<S> + ?Sized>(
    model: &JointValuationModel<S>,
    set: &G,
) -> (usize, S) {
    let mut best = (0, S::neg_infinity());
    for (k, &pair) in set.pairs().iter().enumerate() {
        let v = model.exact_pro(pair);
        if v > best.1 {
            best = (k, v);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{make_needle_instance, CellDensity, PointMassMixture};
    use crate::grid::make_am_grid;

    fn pp(p: f64, q: f64) -> PricePair<f64> {
        PricePair { p, q }
    }

    #[test]
    fn k2_dominates_diagonal_corners() {
        let c = CellDensity::new(2, vec![1.5, 1.0, 0.5, 1.0]).unwrap();
        let m = JointValuationModel::CellDensity(c);
        let (v, d) = opt_k(&m, &make_uniform_grid(2).unwrap()).unwrap();
        assert!(v >= m.exact_gft(pp(0.0, 0.0)).max(m.exact_gft(pp(1.0, 1.0))));
        assert_eq!(d.len(), 4);
    }

    #[test]
    fn uniform_opt_beats_midpoint() {
        let m = JointValuationModel::<f64>::ProductUniform;
        let (v, _) = opt_k(&m, &make_uniform_grid(21).unwrap()).unwrap();
        assert!(v >= 0.125);
    }

    #[test]
    fn reference_rejects_atoms() {
        let m = make_needle_instance(1.0 / 32.0, 0.0f64).unwrap();
        assert!(matches!(
            reference_opt(&m, 11),
            Err(Error::UnsupportedBenchmark(_))
        ));
        assert!(benchmark_opt(&m, 11).is_ok());
    }

    #[test]
    fn single_atom_optimum() {
        let m = JointValuationModel::PointMasses(
            PointMassMixture::new(vec![(0.1f64, 0.9, 1.0)]).unwrap(),
        );
        let (v, support) = point_mass_opt(&m).unwrap();
        assert!((v - 0.8).abs() < 1e-15);
        assert_eq!(support.len(), 1);
        let (p, g) = best_fixed_sbb_price(&m, 11).unwrap();
        assert!((0.1..=0.9).contains(&p));
        assert!((g - 0.8).abs() < 1e-15);
    }

    #[test]
    fn atom_optimum_matches_fine_grid_when_atoms_are_on_it() {
        // atoms on multiples of 1/20 lie on G_21 and G_41
        let m = JointValuationModel::PointMasses(
            PointMassMixture::new(vec![(0.05f64, 0.35, 0.5), (0.65, 0.95, 0.5)]).unwrap(),
        );
        let (exact, _) = point_mass_opt(&m).unwrap();
        let (grid, _) = opt_k(&m, &make_uniform_grid(41).unwrap()).unwrap();
        assert!((exact - grid).abs() < 1e-12, "{exact} vs {grid}");
    }

    #[test]
    fn am_grid_profit_max_is_positive_on_uniform() {
        let m = JointValuationModel::<f64>::ProductUniform;
        let am = make_am_grid::<f64>(4, 16).unwrap();
        let (k, v) = max_profit_on(&m, &am);
        assert!(v > 0.0);
        assert!(am.pairs()[k].p < am.pairs()[k].q);
    }
}
