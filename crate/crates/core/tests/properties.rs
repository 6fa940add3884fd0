mod common;

use pathspt::fgp::{excess_growth_approx, weights_along};
use pathspt::itocalc::{covariation, doleans_exp, doleans_log, ito_integral, quadratic_variation, DoleansMode};
use pathspt::martingale::{compare_at_tau, log_spaced_grid, sv_martingale, NegHalfSquaredNorm};
use pathspt::master::{
    closed_form_portfolio, generated_portfolio, quadratic_leverage, theta_drift, SmoothFunction, LEVERAGE_CAP,
};
use pathspt::{
    dyadic_partitions, simulate_path, value_process, GeneratedPortfolio, Generator, MarketPortfolio, PathGenSpec,
    PathModel, ProcessSeries, WeightPath,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

fn model() -> impl Strategy<Value = PathModel> {
    prop_oneof![
        Just(PathModel::Gbm),
        Just(PathModel::RoughWalk),
        Just(PathModel::Deterministic)
    ]
}

fn generator() -> impl Strategy<Value = Generator> {
    prop_oneof![
        Just(Generator::Quadratic),
        Just(Generator::Entropy),
        (0.05f64..0.95).prop_map(|p| Generator::diversity(p).unwrap()),
    ]
}

fn simplex(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, 2..=max_len).prop_map(|raw| common::normalize(&raw))
}

fn path_strategy() -> impl Strategy<Value = WeightPath> {
    (model(), 2usize..6, 0.05f64..1.5, any::<u64>()).prop_map(|(m, j, vol, seed)| common::path(m, j, 8, vol, seed))
}

fn series(len: usize) -> impl Strategy<Value = ProcessSeries> {
    prop::collection::vec(-2.0f64..2.0, len)
        .prop_map(move |v| ProcessSeries::new((0..v.len()).map(|k| k as f64).collect(), v).unwrap())
}

fn positive_series(len: usize) -> impl Strategy<Value = ProcessSeries> {
    prop::collection::vec(0.2f64..5.0, len)
        .prop_map(move |v| ProcessSeries::new((0..v.len()).map(|k| k as f64).collect(), v).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn simulated_rows_lie_in_open_simplex(p in path_strategy()) {
        for row in p.rows() {
            prop_assert!(row.iter().all(|&v| v > 0.0));
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn partition_levels_are_nested(p in path_strategy(), depth in 1u32..10) {
        let parts = dyadic_partitions(&p, depth).unwrap();
        let levels: Vec<u32> = parts.level_numbers().collect();
        for w in levels.windows(2) {
            let coarse = parts.indices(w[0]).unwrap();
            let fine = parts.indices(w[1]).unwrap();
            prop_assert!(coarse.iter().all(|k| fine.binary_search(k).is_ok()));
        }
    }

    #[test]
    fn zero_volatility_has_zero_qv(m in model(), j in 2usize..6, drift in -1.0f64..1.0, seed in any::<u64>()) {
        let mut spec = PathGenSpec::uniform(m, j, 256, 1.0 / 256.0, 0.0, seed);
        spec.drifts = vec![drift; j];
        let p = simulate_path(&spec).unwrap();
        prop_assert!(p.quadratic_variation_per_asset().iter().all(|&q| q == 0.0));
    }

    #[test]
    fn qv_and_covariation_structure(x in series(64), y in series(64), z in series(64), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let qv = quadratic_variation(&x);
        prop_assert_eq!(qv.first(), 0.0);
        prop_assert!(qv.values().windows(2).all(|w| w[1] >= w[0]));

        let xy = covariation(&x, &y).unwrap();
        let yx = covariation(&y, &x).unwrap();
        prop_assert_eq!(xy.first(), 0.0);
        prop_assert!(xy.max_abs_diff(&yx).unwrap() <= 1e-12);

        let combo = x.combine(a, &y, b).unwrap();
        let lhs = covariation(&combo, &z).unwrap();
        let rhs = covariation(&x, &z).unwrap().combine(a, &covariation(&y, &z).unwrap(), b).unwrap();
        let scale = 1.0 + rhs.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        prop_assert!(lhs.max_abs_diff(&rhs).unwrap() <= 1e-12 * scale);
    }

    #[test]
    fn discrete_ito_identity(x in series(128)) {
        let lhs = ito_integral(&x, &x).unwrap();
        let qv = quadratic_variation(&x);
        let x0 = x.first();
        for k in 0..x.len() {
            let v = x.values()[k];
            let rhs = 0.5 * (v * v - x0 * x0 - qv.values()[k]);
            prop_assert!((lhs.values()[k] - rhs).abs() <= 1e-12 * (1.0 + qv.values()[k]));
        }
    }

    #[test]
    fn log_exp_round_trip(y in positive_series(128)) {
        let back = doleans_exp(&doleans_log(&y).unwrap(), DoleansMode::Product).unwrap();
        for (b, v) in back.values().iter().zip(y.values()) {
            prop_assert!((b * y.first() - v).abs() <= 1e-12 * v.abs().max(1.0));
        }
    }

    #[test]
    fn weight_sum_has_no_variation(p in path_strategy()) {
        let sum = ProcessSeries::new(p.times().to_vec(), p.rows().map(|r| r.iter().sum()).collect()).unwrap();
        prop_assert!(quadratic_variation(&sum).last() <= 1e-28 * p.len() as f64);
    }

    #[test]
    fn market_wealth_is_one(p in path_strategy()) {
        let z = value_process(&MarketPortfolio, &p).unwrap();
        prop_assert!(z.values().iter().all(|v| (v - 1.0).abs() <= 1e-12));
    }

    #[test]
    fn generated_wealth_stays_positive(p in path_strategy(), g in generator()) {
        let z = value_process(&GeneratedPortfolio(&g), &p).unwrap();
        prop_assert!(z.values().iter().all(|&v| v > 0.0));
    }

    #[test]
    fn excess_growth_of_long_only_is_nonnegative(p in path_strategy(), g in generator()) {
        let approx = excess_growth_approx(&GeneratedPortfolio(&g), &p).unwrap();
        prop_assert!(approx.variance_form_residual <= 1e-12);
        prop_assert!(approx.gamma.values().iter().all(|&v| v >= -1e-12));
        prop_assert!(approx.gamma.values().windows(2).all(|w| w[1] >= w[0] - 1e-15));
    }

    #[test]
    fn market_excess_growth_dominates_half_qv(p in path_strategy()) {
        let gamma = excess_growth_approx(&MarketPortfolio, &p).unwrap().gamma;
        let qv = p.total_quadratic_variation();
        for (g, q) in gamma.values().iter().zip(qv.values()) {
            prop_assert!(2.0 * g >= q - 1e-6);
        }
    }

    #[test]
    fn generated_portfolio_sums_to_one(x in simplex(9), g in generator()) {
        let w = generated_portfolio(&g, &x).unwrap();
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        prop_assert!(w.iter().all(|&v| v >= 0.0));
        let c = closed_form_portfolio(&g, &x).unwrap();
        prop_assert!(w.iter().zip(&c).all(|(a, b)| (a - b).abs() <= 1e-10));
    }

    #[test]
    fn generator_derivatives_match_central_differences(x in simplex(6), g in generator()) {
        let n = x.len();
        let h = 1e-5;
        let mut grad = vec![0.0; n];
        let mut hess = vec![0.0; n * n];
        g.gradient(&x, &mut grad);
        g.hessian(&x, &mut hess);
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-5 * a.abs().max(b.abs()).max(1.0);
        for i in 0..n {
            let mut up = x.clone();
            let mut down = x.clone();
            up[i] += h;
            down[i] -= h;
            let fd = (g.value(&up) - g.value(&down)) / (2.0 * h);
            prop_assert!(close(fd, grad[i]), "gradient {i}: fd {fd} vs {}", grad[i]);
            let (mut gu, mut gd) = (vec![0.0; n], vec![0.0; n]);
            g.gradient(&up, &mut gu);
            g.gradient(&down, &mut gd);
            for k in 0..n {
                let fd = (gu[k] - gd[k]) / (2.0 * h);
                prop_assert!(close(fd, hess[k * n + i]), "hessian ({k},{i}): fd {fd} vs {}", hess[k * n + i]);
            }
        }
    }

    #[test]
    fn stopping_values_respect_simplex_norm(m in model(), j in 2usize..5, seed in any::<u64>()) {
        let p = common::path(m, j, 10, 3.0, seed);
        let grid = log_spaced_grid(0.01, 2.0, 24).unwrap();
        let r = compare_at_tau(&p, &grid).unwrap();
        let start: f64 = p.weights_at(0).iter().map(|v| v * v).sum();
        prop_assert!((start - 1.0 / j as f64).abs() <= 1e-12);
        for row in r.reached() {
            prop_assert!(row.sv_value.unwrap() >= row.a + start - 1e-12);
        }
    }

    #[test]
    fn sv_residual_is_rounding_for_quadratic_f(p in path_strategy()) {
        prop_assert!(sv_martingale(&NegHalfSquaredNorm, &p).unwrap().residual <= 1e-10);
    }
}

#[test]
fn portfolios_stay_in_closed_simplex_and_leverage_is_capped() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let gens = [
        Generator::Quadratic,
        Generator::Entropy,
        Generator::diversity(0.3).unwrap(),
    ];
    let mut worst_leverage = f64::NEG_INFINITY;
    for i in 0..100_000 {
        let j = 2 + i % 9;
        let raw: Vec<f64> = (0..j).map(|_| Exp1.sample(&mut rng)).map(|v: f64| v + 1e-12).collect();
        let x = common::normalize(&raw);
        for g in &gens {
            let w = generated_portfolio(g, &x).unwrap();
            assert!(w.iter().all(|&v| (0.0..=1.0).contains(&v)), "{w:?}");
            assert!((w.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        }
        for l in quadratic_leverage(&x).unwrap() {
            worst_leverage = worst_leverage.max(l);
        }
    }
    assert!(worst_leverage <= LEVERAGE_CAP, "{worst_leverage}");
}

#[test]
fn diversity_theta_matches_scaled_excess_growth() {
    let p = common::path(PathModel::RoughWalk, 3, 14, 0.5, 9);
    let parts = dyadic_partitions(&p, 14).unwrap();
    let mut gaps = Vec::new();
    for &pe in &[0.3, 0.5, 0.8] {
        let g = Generator::diversity(pe).unwrap();
        let mut by_level = Vec::new();
        for n in [8, 11, 14] {
            let path = parts.level_path(n).unwrap();
            let theta = theta_drift(&g, &path).unwrap();
            let gamma = excess_growth_approx(&GeneratedPortfolio(&g), &path).unwrap().gamma;
            let scaled = gamma.map(|v| (1.0 - pe) * v).unwrap();
            by_level.push(theta.max_abs_diff(&scaled).unwrap());
        }
        assert!(by_level[2] < by_level[0], "p = {pe}: {by_level:?}");
        assert!(by_level[2] < 1e-3, "p = {pe}: {by_level:?}");
        gaps.push(by_level);
    }
    assert_eq!(gaps.len(), 3);
}

#[test]
fn weights_along_matches_pointwise_calls() {
    let p = common::path(PathModel::Gbm, 4, 6, 0.4, 3);
    let g = Generator::Entropy;
    let all = weights_along(&GeneratedPortfolio(&g), &p).unwrap();
    for (k, row) in p.rows().enumerate() {
        assert_eq!(
            &all[k * 4..(k + 1) * 4],
            generated_portfolio(&g, row).unwrap().as_slice()
        );
    }
}

#[test]
fn master_residual_shrinks_for_every_generator_and_model() {
    for model in [PathModel::Gbm, PathModel::RoughWalk, PathModel::Deterministic] {
        let p = common::path(model, 3, 12, 0.6, 4);
        let parts = dyadic_partitions(&p, 12).unwrap();
        for g in [
            Generator::Quadratic,
            Generator::Entropy,
            Generator::diversity(0.5).unwrap(),
        ] {
            let r = pathspt::master::verify_master(&g, &parts).unwrap();
            assert!(r.converges(), "{model:?} {}: {:?}", g.kind(), r.residual_by_level);
        }
    }
}
