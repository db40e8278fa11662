//! Acceptance report: one PASS/FAIL line per criterion, with details
//! indented below. Exits nonzero on failure only when `ACCEPTANCE_STRICT=1`.

mod common;

use std::time::Instant;

use bns_swap_core::covariance::{self, series, BetaBounds, ModelParams};
use bns_swap_core::mc::{expected_cov_from_bundle, simulate, SimulationConfig, DEFAULT_STEPS};
use bns_swap_core::moments::moment_y;
use bns_swap_core::optimize::{attainable_targets, feasible_weights, qr_constraint_basis};
use bns_swap_core::pricing::{price_eigenvalue, price_trace, SwapContract, SwapKind};
use bns_swap_core::{CovMethod, ExpectedCovMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;

struct Report {
    failures: usize,
}

impl Report {
    fn line(&mut self, name: &str, pass: bool, details: &[String]) {
        println!("{} {name}", if pass { "PASS" } else { "FAIL" });
        for d in details {
            println!("     {d}");
        }
        if !pass {
            self.failures += 1;
        }
    }
}

fn fixture_cov() -> ExpectedCovMatrix {
    ExpectedCovMatrix::from_entries(common::REF_OMEGA).unwrap()
}

fn trace_example(report: &mut Report) {
    let start = Instant::now();
    let contract = SwapContract {
        kind: SwapKind::Trace,
        strike: 0.01,
        maturity: 252.0,
        rate: 0.00014,
        target_return: None,
        reproduction: false,
    };
    let r = price_trace(&fixture_cov(), &contract).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let pass = (r.price - 0.00435).abs() <= 1e-5 && secs < 1.0;
    report.line(
        "trace swap example: price 0.00435 within 1e-5, runtime < 1 s",
        pass,
        &[format!(
            "price = {:.7}, expected metric = {:.5}, runtime = {secs:.2e} s",
            r.price, r.expected_metric
        )],
    );
}

fn eigen_contract(reproduction: bool) -> SwapContract {
    SwapContract {
        kind: SwapKind::MaxEigenvalue,
        strike: 0.01,
        maturity: 252.0,
        rate: 0.00014,
        target_return: Some(0.0007),
        reproduction,
    }
}

fn reproduction_example(report: &mut Report) {
    let start = Instant::now();
    let r = price_eigenvalue(&fixture_cov(), common::REF_MU, &eigen_contract(true)).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let pass = (r.expected_metric - 0.0115).abs() <= 2e-4
        && (r.price - 0.00145).abs() <= 5e-5
        && secs < 1.0;
    report.line(
        "eigenvalue swap example (printed basis): lambda 0.0115 within 2e-4, price 0.00145 within 5e-5, runtime < 1 s",
        pass,
        &[
            format!("lambda = {:.7}, price = {:.7}, runtime = {secs:.2e} s", r.expected_metric, r.price),
            format!("warnings: {:?}", r.diagnostics.warnings),
        ],
    );
}

fn qr_example(report: &mut Report) {
    let basis = qr_constraint_basis(common::REF_MU, 0.0007).unwrap();
    let fw = feasible_weights(&basis, &common::REF_OMEGA).unwrap();
    let r_want = [[0.0319, 0.8676], [0.0, 1.4991]];
    let mut worst: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            worst = worst.max((basis.r[i][j] - r_want[i][j]).abs());
        }
    }
    worst = worst
        .max((fw.q[0] - 0.0219).abs())
        .max((fw.q[1] - 0.6543).abs())
        .max((fw.rmag - 0.7559).abs());
    let corrected = eigen_contract(false);
    let qr_price = price_eigenvalue(&fixture_cov(), common::REF_MU, &corrected).unwrap();
    let p2 = [basis.p[0][1], basis.p[1][1], basis.p[2][1]];
    report.line(
        "QR constraint basis: R, q and rmag within 5e-4",
        worst <= 5e-4,
        &[
            format!(
                "R = {:?}, q = {:?}, rmag = {:.5}, max deviation = {worst:.2e}",
                basis.r, fw.q, fw.rmag
            ),
            format!(
                "corrected P2 = [{:.5}, {:.5}, {:.5}] (the printed basis is not orthogonal)",
                p2[0], p2[1], p2[2]
            ),
            format!(
                "corrected lambda = {:.7} (other sign {:.7}), corrected price = {:.7}",
                fw.lambda_value, fw.other_sign_lambda, qr_price.price
            ),
        ],
    );
}

fn oracle_equivalence(report: &mut Report) {
    let p = common::base_params();
    let start = Instant::now();
    let routes =
        [CovMethod::Approx, CovMethod::Series].map(|m| (m, covariance::expected_cov_matrix(&p, m)));
    let analytic_secs = start.elapsed().as_secs_f64();
    let n_paths = 100_000;
    let cfg = SimulationConfig::new(n_paths, 11);
    let bundle = simulate(&p, &cfg).unwrap();
    let mc = expected_cov_from_bundle(&bundle);
    let secs = start.elapsed().as_secs_f64();
    let mut pass = secs < 300.0;
    let mut details = vec![format!(
        "{n_paths} paths x {} steps, total runtime {secs:.1} s (analytic {analytic_secs:.1} s)",
        DEFAULT_STEPS
    )];
    for (method, result) in &routes {
        match result {
            Ok(cov) => {
                let mut worst: f64 = 0.0;
                let mut row = Vec::new();
                for (i, j) in [(0, 0), (1, 1), (2, 2), (0, 1), (1, 2), (2, 0)] {
                    let se = mc.diagnostics[i][j].stderr.unwrap();
                    let z = (cov.entries[i][j] - mc.entries[i][j]) / se;
                    worst = worst.max(z.abs());
                    row.push(format!(
                        "({},{}) {:.5} vs {:.5} z={z:+.1}",
                        i + 1,
                        j + 1,
                        cov.entries[i][j],
                        mc.entries[i][j]
                    ));
                }
                pass &= worst < 3.0;
                details.push(format!(
                    "{method:?}: max |z| = {worst:.1}; {}",
                    row.join(", ")
                ));
            }
            Err(e) => {
                pass = false;
                details.push(format!("{method:?}: error {e}"));
            }
        }
    }
    report.line("oracle equivalence: both analytic routes within 3 MC stderr on all 6 entries, runtime < 5 min", pass, &details);

    let half = simulate(
        &p,
        &SimulationConfig {
            n_steps: DEFAULT_STEPS / 2,
            ..cfg
        },
    )
    .unwrap();
    let half = expected_cov_from_bundle(&half);
    let mut worst: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            worst = worst.max(
                (half.entries[i][j] - mc.entries[i][j]).abs()
                    / mc.diagnostics[i][j].stderr.unwrap(),
            );
        }
    }
    println!(
        "INFO step halving ({} vs {} steps, same seed): max change = {worst:.2} stderr",
        DEFAULT_STEPS / 2,
        DEFAULT_STEPS
    );
}

fn degenerate_closed_forms(report: &mut Report) {
    let p = common::zero_params();
    let avg = common::decay_average(p.lambda, p.horizon);
    let want = |i: usize, j: usize| {
        p.gamma[i][j] * (p.assets[i].sigma0_sq * p.assets[j].sigma0_sq).sqrt() * avg
    };
    let mut details = Vec::new();
    let mut pass = true;
    let mut check = |label: &str, cov: &ExpectedCovMatrix, tol: f64| {
        let mut worst: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                worst = worst.max((cov.entries[i][j] - want(i, j)).abs() / want(i, j).abs());
            }
        }
        pass &= worst <= tol;
        details.push(format!(
            "{label}: max relative deviation {worst:.2e} (tolerance {tol:.0e})"
        ));
    };
    for m in [CovMethod::Approx, CovMethod::Series] {
        check(
            &format!("{m:?}"),
            &covariance::expected_cov_matrix(&p, m).unwrap(),
            1e-8,
        );
    }
    let mc = expected_cov_from_bundle(&simulate(&p, &SimulationConfig::new(16, 21)).unwrap());
    check("Mc", &mc, 1e-8);
    let mut matched = p;
    matched.beta = BetaBounds::MomentMatched { multiplier: 1.0 };
    let alt = covariance::expected_cov_matrix(&matched, CovMethod::Series).unwrap();
    let mut worst: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            worst = worst.max((alt.entries[i][j] - want(i, j)).abs() / want(i, j).abs());
        }
    }
    details.push(format!(
        "(info) Series with the moment-matched centre: max relative deviation {worst:.2e}"
    ));
    report.line(
        "degenerate closed forms: analytic routes and MC means match the deterministic averages",
        pass,
        &details,
    );
}

fn moment_engine(report: &mut Report) {
    let law = common::unit_gamma_law();
    let mut worst: f64 = 0.0;
    let mut details = Vec::new();
    let mut seed = 100;
    for lambda in [0.1, 0.4, 1.0] {
        for t in [0.5, 2.0, 5.0] {
            let upper = lambda * t;
            let grid = 400;
            let ds = upper / grid as f64;
            let sampler = law.sampler(ds).unwrap();
            let weights: Vec<f64> = (0..grid).map(|j| ((j as f64 + 0.5) * ds).exp()).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            seed += 1;
            let n = 40_000;
            let samples: Vec<f64> = (0..n)
                .map(|_| weights.iter().map(|w| w * sampler.sample(&mut rng)).sum())
                .collect();
            let mut cell = Vec::new();
            for k in 1..=4u32 {
                let pw: Vec<f64> = samples.iter().map(|y| y.powi(k as i32)).collect();
                let m = pw.iter().sum::<f64>() / n as f64;
                let var = pw.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n as f64 - 1.0);
                let se = (var / n as f64).sqrt();
                let z = (moment_y(&law, lambda, t, k).unwrap() - m) / se;
                worst = worst.max(z.abs());
                cell.push(format!("{z:+.2}"));
            }
            details.push(format!("lambda={lambda} t={t}: z = [{}]", cell.join(", ")));
        }
    }
    let c = series::sqrt_coefficients(10);
    let mut exact = true;
    let mut prev = (1i128, 1i128);
    for k in 0..=10i128 {
        if k > 0 {
            // c_k = c_{k-1}·(3 − 2k)/(2k)
            prev = (prev.0 * (3 - 2 * k), prev.1 * 2 * k);
        }
        exact &= c[k as usize] == prev.0 as f64 / prev.1 as f64;
    }
    details.push(format!(
        "max |z| = {worst:.2}; C(1/2,k) exact for k <= 10: {exact}"
    ));
    report.line(
        "moment engine: orders 1-4 within 4 stderr on a 3x3 (lambda, t) grid; C(1/2,k) exact",
        worst < 4.0 && exact,
        &details,
    );
}

fn constraint_invariants(report: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut worst_a, mut worst_n, mut sign_ok, mut count) = (0.0f64, 0.0f64, true, 0);
    while count < 1000 {
        let mu: [f64; 3] = [0, 1, 2].map(|_| rng.random_range(-0.05..0.05));
        let mean = mu.iter().sum::<f64>() / 3.0;
        if mu.iter().map(|x| (x - mean).powi(2)).sum::<f64>().sqrt() < 1e-3 {
            continue;
        }
        let (lo, hi) = attainable_targets(&mu);
        let k = lo + (hi - lo) * rng.random_range(0.005..0.995);
        let b: [[f64; 3]; 3] = [0, 1, 2].map(|_| [0, 1, 2].map(|_| rng.random_range(-0.1..0.1)));
        let mut omega = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                omega[i][j] = (0..3).map(|m| b[i][m] * b[j][m]).sum();
            }
        }
        let fw = feasible_weights(&qr_constraint_basis(mu, k).unwrap(), &omega).unwrap();
        let w = fw.w;
        worst_a = worst_a
            .max((mu[0] * w[0] + mu[1] * w[1] + mu[2] * w[2] - k).abs())
            .max((w[0] + w[1] + w[2] - 1.0).abs());
        worst_n = worst_n.max((w[0] * w[0] + w[1] * w[1] + w[2] * w[2] - 1.0).abs());
        sign_ok &= fw.lambda_value >= fw.other_sign_lambda;
        count += 1;
    }
    report.line(
        "constraint invariants: 1000 random instances with residuals < 1e-10 and the larger sign kept",
        worst_a < 1e-10 && worst_n < 1e-10 && sign_ok,
        &[format!("max |A'w - b| = {worst_a:.2e}, max |w'w - 1| = {worst_n:.2e}, sign rule held: {sign_ok}")],
    );
}

fn correlation(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

fn stationary_correlations(report: &mut Report) {
    let mut p: ModelParams = common::base_params();
    p.horizon = 10.0 / p.lambda;
    let n = 100_000;
    let bundle = simulate(
        &p,
        &SimulationConfig {
            n_paths: n,
            n_steps: 250,
            seed: 31,
            antithetic: false,
            record_paths: false,
        },
    )
    .unwrap();
    let col = |k: usize, range: &mut dyn Iterator<Item = usize>| -> Vec<f64> {
        range
            .map(|i| bundle.paths[i].terminal_variance[k])
            .collect()
    };
    let pairs = [(0, 1), (0, 2), (1, 2)];
    let batches = 20;
    let size = n / batches;
    let full = pairs.map(|(a, b)| correlation(&col(a, &mut (0..n)), &col(b, &mut (0..n))));
    let jack: Vec<[f64; 3]> = (0..batches)
        .map(|b| {
            let keep = |i: &usize| *i / size != b;
            pairs.map(|(x, y)| {
                correlation(
                    &col(x, &mut (0..n).filter(keep)),
                    &col(y, &mut (0..n).filter(keep)),
                )
            })
        })
        .collect();
    let nb = batches as f64;
    let (r12, r13, r23) = p.triple.stationary_vol_correlations().unwrap();
    let want = [r12, r13, r23];
    let mut pass = true;
    let mut row = Vec::new();
    for k in 0..3 {
        let mean = jack.iter().map(|e| e[k]).sum::<f64>() / nb;
        let se = ((nb - 1.0) / nb * jack.iter().map(|e| (e[k] - mean).powi(2)).sum::<f64>()).sqrt();
        let z = (full[k] - want[k]) / se;
        pass &= z.abs() < 3.0;
        row.push(format!("{:.4} vs {:.4} (z={z:+.2})", full[k], want[k]));
    }
    report.line(
        "stationary variance correlations at t = 10/lambda within 3 stderr",
        pass,
        &[format!("(12, 13, 23): {}", row.join(", "))],
    );
}

fn main() {
    let mut report = Report { failures: 0 };
    trace_example(&mut report);
    reproduction_example(&mut report);
    qr_example(&mut report);
    oracle_equivalence(&mut report);
    degenerate_closed_forms(&mut report);
    moment_engine(&mut report);
    constraint_invariants(&mut report);
    stationary_correlations(&mut report);
    println!("{} criteria failed", report.failures);
    if report.failures > 0 && std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
