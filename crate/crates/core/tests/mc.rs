mod common;

use bns_swap_core::covariance::{self, ModelParams};
use bns_swap_core::levy::SubordinatorSpec;
use bns_swap_core::market::{estimate_params, ParamOverrides, ReturnSeries};
use bns_swap_core::mc::{mc_expected_cov, mc_price, simulate, SimulationConfig};
use bns_swap_core::pricing::{price_trace, SwapContract, SwapKind};
use bns_swap_core::{CovMethod, Error};

fn config(n_paths: usize, n_steps: usize, seed: u64) -> SimulationConfig {
    SimulationConfig {
        n_paths,
        n_steps,
        seed,
        antithetic: false,
        record_paths: false,
    }
}

fn trace_contract(strike: f64, rate: f64) -> SwapContract {
    SwapContract {
        kind: SwapKind::Trace,
        strike,
        maturity: 252.0,
        rate,
        target_return: None,
        reproduction: false,
    }
}

/// Gamma laws with daily-scale means so that exponentials of log-prices stay tame.
fn daily_params() -> ModelParams {
    let mut p = common::base_params();
    let g = SubordinatorSpec::Gamma { a: 1.0, b: 1000.0 };
    p.triple.z1 = g;
    p.triple.z_star = g;
    p.triple.z_star_star = g;
    for a in &mut p.assets {
        a.rho = -0.5;
    }
    p
}

#[test]
fn zero_model_without_initial_variance_realizes_nothing() {
    let mut p = common::zero_params();
    for a in &mut p.assets {
        a.sigma0_sq = 0.0;
    }
    let bundle = simulate(&p, &config(16, 50, 1)).unwrap();
    for path in &bundle.paths {
        assert_eq!(path.realized, [[0.0; 3]; 3]);
    }
    let priced = mc_price(&p, &trace_contract(0.0, 0.00014), &config(16, 50, 1)).unwrap();
    assert_eq!(priced.price, 0.0);
}

#[test]
fn zero_subordinators_give_the_deterministic_averages() {
    let p = common::zero_params();
    let cov = mc_expected_cov(&p, &config(8, 252, 2)).unwrap();
    let avg = common::decay_average(p.lambda, p.horizon);
    for i in 0..3 {
        for j in 0..3 {
            let want = p.gamma[i][j] * (p.assets[i].sigma0_sq * p.assets[j].sigma0_sq).sqrt() * avg;
            let got = cov.entries[i][j];
            assert!(
                (got - want).abs() <= 1e-12 * want.abs(),
                "({i},{j}): {got} vs {want}"
            );
        }
    }
    assert_eq!(cov.method, CovMethod::Mc);
}

#[test]
fn results_depend_only_on_seed_and_path_index() {
    let p = daily_params();
    let a = simulate(&p, &config(12, 100, 7)).unwrap();
    let b = simulate(&p, &config(12, 100, 7)).unwrap();
    assert_eq!(a, b);
    let longer = simulate(&p, &config(20, 100, 7)).unwrap();
    assert_eq!(&a.paths[..], &longer.paths[..12]);
    let other = simulate(&p, &config(12, 100, 8)).unwrap();
    assert_ne!(a.paths[0], other.paths[0]);
}

#[test]
fn antithetic_twins_share_the_subordinator_path() {
    let p = daily_params();
    let mut c = config(10, 100, 3);
    c.antithetic = true;
    let bundle = simulate(&p, &c).unwrap();
    for pair in bundle.paths.chunks(2) {
        assert_eq!(pair[0].terminal_variance, pair[1].terminal_variance);
        assert_ne!(pair[0].terminal_log_price, pair[1].terminal_log_price);
    }
    c.n_paths = 9;
    assert!(matches!(simulate(&p, &c), Err(Error::Argument(_))));
}

#[test]
fn variances_stay_nonnegative_along_recorded_paths() {
    let mut p = common::base_params();
    p.assets[2].sigma0_sq = 0.0;
    let mut c = config(20, 500, 4);
    c.record_paths = true;
    let bundle = simulate(&p, &c).unwrap();
    for path in &bundle.paths {
        let traj = path.trajectory.as_ref().unwrap();
        assert_eq!(traj.len(), 500);
        assert!(traj.iter().all(|s| s.sigma_sq.iter().all(|v| *v >= 0.0)));
        assert!(traj.iter().all(|s| s.dz.iter().all(|v| *v >= 0.0)));
        assert!(path.min_variance >= 0.0);
        for i in 0..3 {
            assert!(path.realized[i][i] >= 0.0);
        }
        assert_eq!(traj.last().unwrap().sigma_sq, path.terminal_variance);
    }
}

#[test]
fn log_prices_minus_drift_have_mean_zero_without_jumps() {
    let mut p = common::zero_params();
    for a in &mut p.assets {
        a.rho = 0.0;
    }
    let bundle = simulate(&p, &config(4000, 252, 5)).unwrap();
    for i in 0..3 {
        let e = bundle.estimate(|path| path.terminal_log_price[i] - path.drift_integral[i]);
        assert!(
            e.mean.abs() < 3.0 * e.stderr,
            "asset {i}: {} ± {}",
            e.mean,
            e.stderr
        );
    }
}

#[test]
fn discounted_prices_are_martingales_with_leverage_jumps() {
    let p = daily_params();
    let bundle = simulate(&p, &config(4000, 504, 6)).unwrap();
    for i in 0..3 {
        let e = bundle.estimate(|path| (path.terminal_log_price[i] - p.rate * p.horizon).exp());
        assert!(
            (e.mean - 1.0).abs() < 3.0 * e.stderr,
            "asset {i}: {} ± {}",
            e.mean,
            e.stderr
        );
    }
}

#[test]
fn positive_leverage_outside_the_cgf_domain_is_rejected() {
    let mut p = common::base_params();
    p.assets[1].rho = 1.5;
    assert!(matches!(
        simulate(&p, &config(2, 10, 1)),
        Err(Error::Params(_))
    ));
}

/// Unit-shape Gamma laws whose means pin `E[σᵢ²] = Ωᵢᵢ` at every time.
fn trace_matched_params() -> ModelParams {
    let omega = common::REF_OMEGA;
    let mut p = common::base_params();
    p.triple.r2 = 0.2319;
    p.triple.r3 = 0.2;
    let k1 = omega[0][0];
    let k_star = (omega[1][1] - p.triple.r2 * k1) / p.triple.s2();
    let k_star_star = (omega[2][2] - p.triple.r3 * k1) / p.triple.s3();
    p.triple.z1 = SubordinatorSpec::Gamma {
        a: 1.0,
        b: 1.0 / k1,
    };
    p.triple.z_star = SubordinatorSpec::Gamma {
        a: 1.0,
        b: 1.0 / k_star,
    };
    p.triple.z_star_star = SubordinatorSpec::Gamma {
        a: 1.0,
        b: 1.0 / k_star_star,
    };
    for i in 0..3 {
        p.assets[i].sigma0_sq = omega[i][i];
        p.assets[i].rho = 0.0;
    }
    p
}

#[test]
fn trace_price_matches_the_analytic_legs() {
    let p = trace_matched_params();
    let analytic = covariance::expected_cov_matrix(&p, CovMethod::Approx).unwrap();
    assert!(
        (analytic.trace() - 0.01451).abs() < 1e-12,
        "{}",
        analytic.trace()
    );
    let contract = trace_contract(0.01, 0.00014);
    let exact = price_trace(&analytic, &contract).unwrap();
    let mc = mc_price(&p, &contract, &config(2000, 2520, 9)).unwrap();
    let se = mc.diagnostics.stderr.unwrap();
    assert!(
        (mc.price - exact.price).abs() < 3.0 * se,
        "{} vs {} ± {se}",
        mc.price,
        exact.price
    );
}

#[test]
fn strike_shift_moves_the_price_by_the_discounted_shift() {
    let p = daily_params();
    let c = config(50, 252, 10);
    let base = mc_price(&p, &trace_contract(0.01, 0.00014), &c).unwrap();
    let delta = 0.003;
    let shifted = mc_price(&p, &trace_contract(0.01 + delta, 0.00014), &c).unwrap();
    assert!((shifted.price - base.price + base.discount * delta).abs() < 1e-17);
    assert_eq!(shifted.expected_metric, base.expected_metric);
}

fn correlation(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

/// Correlation estimates with a jackknife standard error over `batches` blocks.
fn jackknife_correlations(v: &[[f64; 3]], batches: usize) -> ([f64; 3], [f64; 3]) {
    let pairs = [(0, 1), (0, 2), (1, 2)];
    let col = |rows: &[[f64; 3]], k: usize| rows.iter().map(|r| r[k]).collect::<Vec<f64>>();
    let full = pairs.map(|(a, b)| correlation(&col(v, a), &col(v, b)));
    let size = v.len() / batches;
    let mut leave_out = vec![[0.0; 3]; batches];
    for (b, est) in leave_out.iter_mut().enumerate() {
        let rest: Vec<[f64; 3]> = v[..b * size]
            .iter()
            .chain(&v[(b + 1) * size..])
            .copied()
            .collect();
        *est = pairs.map(|(x, y)| correlation(&col(&rest, x), &col(&rest, y)));
    }
    let nb = batches as f64;
    let se = [0, 1, 2].map(|k| {
        let mean = leave_out.iter().map(|e| e[k]).sum::<f64>() / nb;
        ((nb - 1.0) / nb * leave_out.iter().map(|e| (e[k] - mean).powi(2)).sum::<f64>()).sqrt()
    });
    (full, se)
}

#[test]
fn simulated_stationary_variances_have_the_predicted_correlations() {
    let mut p = common::base_params();
    p.triple.r2 = 0.5;
    p.triple.r3 = 0.5;
    p.horizon = 10.0 / p.lambda;
    let bundle = simulate(&p, &config(20_000, 250, 12)).unwrap();
    let v: Vec<[f64; 3]> = bundle
        .paths
        .iter()
        .map(|path| path.terminal_variance)
        .collect();
    let (est, se) = jackknife_correlations(&v, 20);
    let (r12, r13, r23) = p.triple.stationary_vol_correlations().unwrap();
    for (k, want) in [r12, r13, r23].into_iter().enumerate() {
        assert!(
            (est[k] - want).abs() < 3.0 * se[k],
            "pair {k}: {} ± {} vs {want}",
            est[k],
            se[k]
        );
    }
}

#[test]
fn estimation_recovers_the_brownian_correlations_of_a_simulated_path() {
    let mut p = daily_params();
    for a in &mut p.assets {
        a.rho = 0.0;
    }
    p.gamma = [[1.0, 0.6, -0.3], [0.6, 1.0, 0.1], [-0.3, 0.1, 1.0]];
    let n = 10_000;
    p.horizon = n as f64;
    let mut c = config(1, n, 13);
    c.record_paths = true;
    let bundle = simulate(&p, &c).unwrap();
    let traj = bundle.paths[0].trajectory.as_ref().unwrap();
    let dates: Vec<String> = (0..=n).map(|d| format!("d{d:06}")).collect();
    let series = [0, 1, 2].map(|i| {
        let prices: Vec<f64> = std::iter::once(1.0)
            .chain(traj.iter().map(|s| s.log_price[i].exp()))
            .collect();
        ReturnSeries::from_prices(format!("a{i}"), dates.clone(), prices).unwrap()
    });
    let est = estimate_params(&series, &ParamOverrides::default()).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            assert!(
                (est.gamma[i][j] - p.gamma[i][j]).abs() < 0.1,
                "({i},{j}): {}",
                est.gamma[i][j]
            );
        }
    }
}
