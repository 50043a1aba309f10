mod common;

use gbb_core::env::{one_bit_feedback, JointValuationModel, PointMassMixture};
use gbb_core::grid::{make_am_grid, make_uniform_grid, PricePair, PriceSet};
use gbb_core::learner::{
    configure, run_episode, run_episode_with_diagnostics, ExploitConfig, ExploitState,
    ExplorationState, ProfitMaxState, ScheduleMultipliers,
};
use gbb_core::oracle::solve_constrained_simplex_lp;
use gbb_core::runlog::Phase;
use rand::Rng;

use common::*;

/// Runs a full exploration phase against `model`, valuations from `env`.
fn explore(model: &JointValuationModel<f64>, k: usize, n: usize, seed: u64) -> ExplorationState {
    let mut st = ExplorationState::new(k, n).unwrap();
    let (mut env, mut learner) = (rng(seed), rng(seed ^ 0x9e37_79b9));
    let mut bit = None;
    while let Some(pair) = st.step(bit, &mut learner) {
        let (s, b) = model.sample(&mut env);
        bit = Some(one_bit_feedback(s, b, pair));
    }
    assert!(st.is_done());
    st
}

#[test]
fn estimates_are_means_of_indicators() {
    let model = JointValuationModel::ProductUniform;
    let (k, n) = (6, 97);
    let st = explore(&model, k, n, 3);
    assert_eq!(st.rounds(), 2 * k * n);
    for (counts, hat) in [(st.l_counts(), st.l_hat()), (st.r_counts(), st.r_hat())] {
        for (&c, &h) in counts.iter().zip(&hat) {
            assert!(c as usize <= n);
            assert_eq!(h, f64::from(c) / n as f64);
            assert!((0.0..=1.0).contains(&h));
        }
    }
}

#[test]
fn never_trading_gives_zero_tables() {
    let mut st = ExplorationState::new(4, 10).unwrap();
    let mut r = rng(0);
    let mut bit = None;
    while st.step(bit, &mut r).is_some() {
        bit = Some(false);
    }
    assert!(st.l_hat().iter().chain(&st.r_hat()).all(|&v| v == 0.0));
}

#[test]
fn degenerate_atom_recovers_price() {
    // (s, b) = (0, 1) always trades, so L_hat(p, q) estimates P(U <= p) = p
    // and R_hat(p, q) estimates 1 - q.
    let model =
        JointValuationModel::PointMasses(PointMassMixture::new(vec![(0.0, 1.0, 1.0)]).unwrap());
    let k = 5;
    let st = explore(&model, k, 10_000, 21);
    let grid = make_uniform_grid::<f64>(k).unwrap();
    for (idx, pair) in grid.pairs().iter().enumerate() {
        assert!((st.l_hat()[idx] - pair.p).abs() <= 0.03, "{pair:?}");
        assert!((st.r_hat()[idx] - (1.0 - pair.q)).abs() <= 0.03, "{pair:?}");
        assert!((model.exact_l(*pair) - pair.p).abs() < 1e-15);
    }
}

#[test]
fn exp3_prefers_the_profitable_arm() {
    let a = PricePair { p: 0.25, q: 0.75 };
    let b = PricePair { p: 0.75, q: 0.25 };
    let mut st = ProfitMaxState::new(vec![a, b], 1e18, 2000).unwrap();
    let mut r = rng(5);
    let mut profit = None;
    let mut plays_a = 0;
    while let Some(pair) = st.step(profit, &mut r) {
        let is_a = pair == a;
        plays_a += usize::from(is_a);
        profit = Some(if is_a { 0.5 } else { -0.5 });
    }
    assert_eq!(st.rounds(), 2000);
    assert!(plays_a as f64 / 2000.0 > 0.9, "{plays_a}");
    assert!(st.probabilities()[0] > 0.9);
}

#[test]
fn exp3_single_arm_and_zero_target() {
    let only = PricePair { p: 0.1, q: 0.6 };
    let mut st = ProfitMaxState::new(vec![only], 1e18, 50).unwrap();
    let mut r = rng(1);
    let mut profit = None;
    while let Some(pair) = st.step(profit, &mut r) {
        assert_eq!(pair, only);
        profit = Some(0.0);
    }
    assert_eq!(st.rounds(), 50);

    let am = make_am_grid::<f64>(4, 64).unwrap();
    let mut st = ProfitMaxState::from_grid(&am, 0.0, 64).unwrap();
    assert!(st.step(None, &mut r).is_none());
    assert_eq!((st.rounds(), st.collected()), (0, 0.0));
}

#[test]
fn two_arm_toy_mixes_at_the_tight_constraint() {
    // K = 2: indices (0,0), (0,1), (1,0), (1,1). The arm (1,0) has the larger
    // L + R but profit -0.5; (0,1) has profit +0.5; the diagonal earns 0.
    let mut l_hat = vec![0.0; 4];
    let mut r_hat = vec![0.0; 4];
    l_hat[2] = 1.0;
    r_hat[2] = 1.0;
    let true_pro = [0.0, 0.5, -0.5, 0.0];
    let rounds = 100_000;
    let cfg = ExploitConfig {
        k: 2,
        n: 1_000_000,
        horizon: rounds,
        delta: 0.1,
        confidence_constant: 6.0,
    };
    let mut st = ExploitState::new(cfg, &l_hat, &r_hat).unwrap();
    let mut r = rng(8);
    let mut profit = None;
    let mut late_negative = 0usize;
    for t in 0..rounds {
        let pair = st.step(profit, &mut r);
        assert!(st.last_constraint_slack() >= -1e-10, "round {t}");
        let idx = st.grid().pairs().iter().position(|&x| x == pair).unwrap();
        if t >= rounds / 2 && idx == 2 {
            late_negative += 1;
        }
        profit = Some(true_pro[idx]);
    }
    assert_eq!(st.violations(), 0);
    let freq = late_negative as f64 / (rounds / 2) as f64;

    let true_r: Vec<f64> = (0..4).map(|k| l_hat[k] + r_hat[k] + true_pro[k]).collect();
    let lp = solve_constrained_simplex_lp(&true_r, &true_pro).unwrap();
    let want = lp
        .support
        .iter()
        .find(|(k, _)| *k == 2)
        .map_or(0.0, |&(_, w)| w);
    assert!((want - 0.5).abs() < 1e-12);
    assert!((freq - want).abs() <= 0.05, "{freq}");
}

#[test]
fn optimistic_estimates_dominate_on_the_clean_event() {
    let model = JointValuationModel::ProductUniform;
    let (k, n, horizon, delta) = (5, 400, 20_000, 0.1);
    let grid = make_uniform_grid::<f64>(k).unwrap();
    let exact_l: Vec<f64> = grid.pairs().iter().map(|&p| model.exact_l(p)).collect();
    let exact_r: Vec<f64> = grid.pairs().iter().map(|&p| model.exact_r(p)).collect();
    let exact_pro: Vec<f64> = grid.pairs().iter().map(|&p| model.exact_pro(p)).collect();
    let cfg = ExploitConfig {
        k,
        n,
        horizon,
        delta,
        confidence_constant: 6.0,
    };
    let mut clean_runs = 0;
    for seed in 0..10 {
        let ex = explore(&model, k, n, seed);
        let bonus = cfg.estimate_bonus();
        let clean_lr = (0..grid.len()).all(|i| {
            (ex.l_hat()[i] - exact_l[i]).abs() <= bonus
                && (ex.r_hat()[i] - exact_r[i]).abs() <= bonus
        });
        let mut st = ExploitState::new(cfg, &ex.l_hat(), &ex.r_hat()).unwrap();
        if clean_lr {
            assert!(
                (0..grid.len()).all(|i| st.l_bar()[i] >= exact_l[i] && st.r_bar()[i] >= exact_r[i])
            );
        }
        let (mut env, mut lr) = (rng(1000 + seed), rng(2000 + seed));
        let mut profit = None;
        let mut clean = clean_lr;
        for _ in 0..4000 {
            let pair = st.step(profit, &mut lr);
            let (s, b) = model.sample(&mut env);
            profit = Some(if one_bit_feedback(s, b, pair) {
                pair.q - pair.p
            } else {
                0.0
            });
            clean &= (0..grid.len()).all(|i| {
                let v = st.visits()[i];
                v == 0 || {
                    let w = (2.0 * cfg.profit_log_term() / v as f64).sqrt().min(1.0);
                    (st.profit_sums()[i] / v as f64 - exact_pro[i]).abs() <= w
                }
            });
            if clean {
                for (i, &pro) in exact_pro.iter().enumerate() {
                    assert!(st.optimistic_profit(i) >= pro - 1e-12);
                }
                assert_eq!(st.violations(), 0);
            }
        }
        clean_runs += usize::from(clean);
    }
    assert!(clean_runs >= 9, "{clean_runs}");
}

#[test]
fn first_exploit_round_plays_every_pair_with_equal_weight() {
    let cfg = ExploitConfig {
        k: 3,
        n: 10,
        horizon: 100,
        delta: 0.1,
        confidence_constant: 6.0,
    };
    let st = ExploitState::new(cfg, &[0.2; 9], &[0.3; 9]).unwrap();
    assert!(st
        .current_distribution()
        .weights()
        .iter()
        .all(|&w| (w - 1.0 / 9.0).abs() < 1e-15));
    assert!((0..9).all(|i| st.optimistic_profit(i) == 1.0));
}

#[test]
fn phases_run_in_order_with_exact_exploration_length() {
    let mult = ScheduleMultipliers {
        c_k: 0.75,
        c_n: 0.25,
        c_beta: 0.005,
    };
    for seed in 0..4 {
        let params = configure(16_384, 0.1, mult).unwrap();
        let (log, d) =
            run_episode_with_diagnostics(&JointValuationModel::ProductUniform, params, seed)
                .unwrap();
        assert_eq!(log.len(), params.horizon);
        let counts = log.phase_counts();
        assert!(counts[2] > 0, "{counts:?}");
        assert_eq!(counts[1], 2 * params.k * params.n);
        assert_eq!(d.exploration_rounds, counts[1]);
        let phases: Vec<Phase> = log.records.iter().map(|r| r.phase).collect();
        assert!(phases.windows(2).all(|w| w[0] as u8 <= w[1] as u8));
        assert!(d.profit_collected >= params.beta);
    }
}

#[test]
fn episodes_are_bit_for_bit_reproducible() {
    let params = configure(4096, 0.1, ScheduleMultipliers::default()).unwrap();
    let m = random_cell_density(&mut rng(2), 3);
    let a = run_episode(&m, params, 99).unwrap();
    let b = run_episode(&m, params, 99).unwrap();
    let c = run_episode(&m, params, 100).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn exploration_probes_use_fresh_uniform_prices() {
    let mut st = ExplorationState::new(3, 2000).unwrap();
    let mut r = rng(4);
    let mut row = Vec::new();
    let mut bit = None;
    while let Some(pair) = st.step(bit, &mut r) {
        if st.rounds() <= 2000 {
            assert_eq!(pair.q, 0.0);
            row.push(pair.p);
        }
        bit = Some(r.random_bool(0.5));
    }
    let mean = row.iter().sum::<f64>() / row.len() as f64;
    assert!((mean - 0.5).abs() < 0.03, "{mean}");
}
