mod common;

use gbb_core::grid::{
    make_am_grid, make_uniform_grid, mix, GridDistribution, GridTag, PricePair, PriceSet,
};
use proptest::prelude::*;

/// Brute-force F_K: every anchor, exponent and side, kept when inside the
/// square, compared up to 1e-12.
fn brute_force_am(k: usize, t: usize) -> Vec<(f64, f64)> {
    let mut e = 0;
    while (1usize << e) < t {
        e += 1;
    }
    let mut out: Vec<(f64, f64)> = Vec::new();
    for a in 0..k {
        let x = a as f64 / (k - 1) as f64;
        for i in 0..=e {
            let d = 1.0 / (1u64 << i) as f64;
            for cand in [(x - d, x), (x, x + d)] {
                let inside = cand.0 >= 0.0 && cand.1 <= 1.0;
                let dup = out
                    .iter()
                    .any(|o| (o.0 - cand.0).abs() < 1e-12 && (o.1 - cand.1).abs() < 1e-12);
                if inside && !dup {
                    out.push(cand);
                }
            }
        }
    }
    out
}

#[test]
fn uniform_coordinates_are_exact() {
    for k in 2..60 {
        let g = make_uniform_grid::<f64>(k).unwrap();
        assert_eq!(g.len(), k * k);
        for i in 0..k {
            for j in 0..k {
                let pt = g.pairs()[i * k + j];
                assert_eq!(pt.p.to_bits(), (i as f64 / (k - 1) as f64).to_bits());
                assert_eq!(pt.q.to_bits(), (j as f64 / (k - 1) as f64).to_bits());
            }
        }
    }
}

#[test]
fn am_grid_matches_brute_force() {
    for (k, t) in [(2, 2), (3, 5), (5, 64), (10, 1024), (16, 65536), (7, 1000)] {
        let am = make_am_grid::<f64>(k, t).unwrap();
        let want = brute_force_am(k, t);
        assert_eq!(am.len(), want.len(), "K = {k}, T = {t}");
        for w in &want {
            assert!(
                am.pairs()
                    .iter()
                    .any(|p| (p.p - w.0).abs() < 1e-12 && (p.q - w.1).abs() < 1e-12),
                "missing {w:?}"
            );
        }
        assert!(am.len() <= am.size_bound());
        assert!(am
            .pairs()
            .iter()
            .all(|p| p.p <= p.q && p.p >= 0.0 && p.q <= 1.0));
        let sorted = am
            .pairs()
            .windows(2)
            .all(|w| (w[0].p, w[0].q) <= (w[1].p, w[1].q));
        assert!(sorted, "pairs must be sorted by (p, q)");
    }
    assert!(make_am_grid::<f64>(10, 1024).unwrap().len() <= 220);
}

#[test]
fn am_grid_k2_t2_by_hand() {
    let am = make_am_grid::<f64>(2, 2).unwrap();
    let got: Vec<(f64, f64)> = am.pairs().iter().map(|p| (p.p, p.q)).collect();
    assert_eq!(got, vec![(0.0, 0.5), (0.0, 1.0), (0.5, 1.0)]);
}

proptest! {
    #[test]
    fn mixing_preserves_mass(seed in any::<u64>(), len in 1usize..50, alpha in 0.0f64..=1.0) {
        use rand::Rng;
        let mut r = common::rng(seed);
        let tag = GridTag::Custom { len };
        let mut draw = || {
            let w: Vec<f64> = (0..len).map(|_| r.random::<f64>()).collect();
            let s: f64 = w.iter().sum();
            GridDistribution::from_weights(tag, w.into_iter().map(|x| x / s).collect()).unwrap()
        };
        let (d1, d2) = (draw(), draw());
        let m = mix(&d1, &d2, alpha).unwrap();
        prop_assert!((m.total_mass() - 1.0).abs() <= 1e-12);
        prop_assert!(m.weights().iter().all(|&w| w >= 0.0));
    }
}

#[test]
fn price_pairs_validate_range() {
    assert!(PricePair::new(0.0, 1.0).is_ok());
    assert!(PricePair::new(-0.1, 0.5).is_err());
    assert!(PricePair::new(0.5, 1.5).is_err());
}
