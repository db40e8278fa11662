//! Seeded Monte Carlo simulation of the three-asset model.
//!
//! Each step of length `Δ` draws the subordinator increments over the
//! business-time step `λΔ` and lets every jump arrive at the step midpoint.
//! Between jumps `σ²` decays exactly, so on each half-step
//! `∫σᵢσⱼ ds = √(σᵢ²σⱼ²)·(1 − e^{−λΔ/2})/λ` and the Brownian increments are
//! exact Gaussians with covariance `γᵢⱼ∫σᵢσⱼ`. Collapsing the jumps onto the
//! midpoint biases time averages of `σ²` by a relative `(λΔ)²/24`.
//!
//! Per path the realized covariation is
//! `(1/T)[γᵢⱼΣ∫σᵢσⱼ + ρᵢρⱼΣ(ΔZ¹ − κ¹₁λΔ)²]`. The jump part sums squared
//! *compensated* increments, whose expectation `κ¹₂λT` equals that of the
//! sum of squared jumps on any grid.
//!
//! Randomness is a ChaCha8 stream per path (key from the seed, stream id
//! from the path index), so results do not depend on scheduling.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float as _;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::covariance::{self, CovMethod, EntryDiagnostics, ExpectedCovMatrix, ModelParams};
use crate::levy::{Cumulants, IncrementSampler};
use crate::optimize;
use crate::pricing::{self, PricingDiagnostics, PricingResult, SwapContract, SwapKind};
use crate::{Error, Result};

/// Default number of time steps per simulated path (10 per day over a year).
pub const DEFAULT_STEPS: usize = 2520;

/// Simulation settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    /// Number of paths (even when `antithetic`).
    pub n_paths: usize,
    /// Number of steps over `[0, T]`.
    pub n_steps: usize,
    /// Seed of the per-path streams.
    pub seed: u64,
    /// Pair each path with its Gaussian mirror image.
    #[serde(default)]
    pub antithetic: bool,
    /// Keep per-step trajectories (memory heavy).
    #[serde(default)]
    pub record_paths: bool,
}

impl SimulationConfig {
    /// `n_paths` paths on the default grid.
    pub fn new(n_paths: usize, seed: u64) -> Self {
        SimulationConfig {
            n_paths,
            n_steps: DEFAULT_STEPS,
            seed,
            antithetic: false,
            record_paths: false,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_paths == 0 || self.n_steps == 0 {
            return Err(Error::Argument(
                "n_paths and n_steps must be at least 1".into(),
            ));
        }
        if self.antithetic && self.n_paths % 2 != 0 {
            return Err(Error::Argument(
                "antithetic sampling needs an even number of paths".into(),
            ));
        }
        Ok(())
    }
}

/// State after one step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    /// `σᵢ²` at the end of the step.
    pub sigma_sq: [f64; 3],
    /// Log-prices `Xᵢ − Xᵢ(0)` at the end of the step.
    pub log_price: [f64; 3],
    /// Increments of `Z¹, Z*, Z**` over the step.
    pub dz: [f64; 3],
}

/// Per-path output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSummary {
    /// `(1/T)[Xⁱ, Xʲ]_T`.
    pub realized: [[f64; 3]; 3],
    /// `Xᵢ(T) − Xᵢ(0)`.
    pub terminal_log_price: [f64; 3],
    /// `σᵢ²(T)`.
    pub terminal_variance: [f64; 3],
    /// Smallest variance seen on the path.
    pub min_variance: f64,
    /// `∫₀ᵀ bᵢ dt` along the path.
    pub drift_integral: [f64; 3],
    /// Per-step states, if recorded.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<Vec<StepRecord>>,
}

/// All simulated paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathBundle {
    /// Settings used.
    pub config: SimulationConfig,
    /// Horizon `T` in days.
    pub horizon: f64,
    /// Paths in index order; antithetic twins are adjacent.
    pub paths: Vec<PathSummary>,
}

/// Sample mean and standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    /// Mean.
    pub mean: f64,
    /// Standard error of the mean.
    pub stderr: f64,
}

/// Neumaier-compensated sum.
fn compensated_sum<I: Iterator<Item = f64>>(it: I) -> f64 {
    let (mut sum, mut c) = (0.0f64, 0.0f64);
    for x in it {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            c += (sum - t) + x;
        } else {
            c += (x - t) + sum;
        }
        sum = t;
    }
    sum + c
}

fn estimate(values: &[f64]) -> Estimate {
    let n = values.len() as f64;
    let mean = compensated_sum(values.iter().copied()) / n;
    if values.len() < 2 {
        return Estimate {
            mean,
            stderr: f64::NAN,
        };
    }
    let ss = compensated_sum(values.iter().map(|v| (v - mean) * (v - mean)));
    Estimate {
        mean,
        stderr: (ss / (n - 1.0) / n).sqrt(),
    }
}

impl PathBundle {
    /// Mean and standard error of a per-path statistic; antithetic twins
    /// are averaged first.
    pub fn estimate<F: Fn(&PathSummary) -> f64>(&self, f: F) -> Estimate {
        let values: Vec<f64> = if self.config.antithetic {
            self.paths
                .chunks(2)
                .map(|c| 0.5 * (f(&c[0]) + f(&c[1])))
                .collect()
        } else {
            self.paths.iter().map(f).collect()
        };
        estimate(&values)
    }
}

fn cholesky(g: &[[f64; 3]; 3]) -> Result<[[f64; 3]; 3]> {
    let mut l = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..=i {
            let mut s = g[i][j] + if i == j { 1e-12 } else { 0.0 };
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if !(s > 0.0) {
                    return Err(Error::Params("gamma is not positive semidefinite".into()));
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    Ok(l)
}

struct Kernel {
    horizon: f64,
    n_steps: usize,
    dt: f64,
    half_decay: f64,
    half_weight: f64,
    drift: [f64; 3],
    rho: [f64; 3],
    sigma0_sq: [f64; 3],
    gamma: [[f64; 3]; 3],
    chol: [[f64; 3]; 3],
    comp: f64,
    samplers: [IncrementSampler; 3],
    r2: f64,
    s2: f64,
    r3: f64,
    s3: f64,
    record: bool,
}

impl Kernel {
    fn new(params: &ModelParams, config: &SimulationConfig) -> Result<Self> {
        params.validate()?;
        config.validate()?;
        let tr = &params.triple;
        let dt = params.horizon / config.n_steps as f64;
        let h = params.lambda * dt;
        let mut drift = [0.0; 3];
        for (i, a) in params.assets.iter().enumerate() {
            let k = tr.z1.cgf(a.rho).map_err(|e| {
                Error::Params(alloc::format!(
                    "asset {}: jump compensator undefined for rho = {}: {e}",
                    i + 1,
                    a.rho
                ))
            })?;
            drift[i] = params.rate - params.lambda * k;
        }
        let half_decay = (-0.5 * h).exp();
        Ok(Kernel {
            horizon: params.horizon,
            n_steps: config.n_steps,
            dt,
            half_decay,
            half_weight: -(-0.5 * h).exp_m1() / params.lambda,
            drift,
            rho: [
                params.assets[0].rho,
                params.assets[1].rho,
                params.assets[2].rho,
            ],
            sigma0_sq: [
                params.assets[0].sigma0_sq,
                params.assets[1].sigma0_sq,
                params.assets[2].sigma0_sq,
            ],
            gamma: params.gamma,
            chol: cholesky(&params.gamma)?,
            comp: tr.z1.kappa(1) * h,
            samplers: [
                tr.z1.sampler(h)?,
                tr.z_star.sampler(h)?,
                tr.z_star_star.sampler(h)?,
            ],
            r2: tr.r2,
            s2: tr.s2(),
            r3: tr.r3,
            s3: tr.s3(),
            record: config.record_paths,
        })
    }

    fn correlated_normals(&self, rng: &mut ChaCha8Rng, sign: f64) -> [f64; 3] {
        let mut e = [0.0f64; 3];
        for v in e.iter_mut() {
            let z: f64 = StandardNormal.sample(rng);
            *v = sign * z;
        }
        let l = &self.chol;
        [
            l[0][0] * e[0],
            l[1][0] * e[0] + l[1][1] * e[1],
            l[2][0] * e[0] + l[2][1] * e[1] + l[2][2] * e[2],
        ]
    }

    fn path(&self, mut rng: ChaCha8Rng, sign: f64) -> PathSummary {
        let mut s = self.sigma0_sq;
        let mut x = [0.0; 3];
        let mut drift_int = [0.0; 3];
        let mut cross = [[0.0; 3]; 3];
        let mut jqv = 0.0;
        let mut min_var = s[0].min(s[1]).min(s[2]);
        let mut trajectory = self.record.then(|| Vec::with_capacity(self.n_steps));
        for _ in 0..self.n_steps {
            let dz1 = self.samplers[0].sample(&mut rng);
            let dzs = self.samplers[1].sample(&mut rng);
            let dzss = self.samplers[2].sample(&mut rng);
            let dz = [
                dz1,
                self.r2 * dz1 + self.s2 * dzs,
                self.r3 * dz1 + self.s3 * dzss,
            ];
            let n1 = self.correlated_normals(&mut rng, sign);
            let n2 = self.correlated_normals(&mut rng, sign);

            let root_a = [s[0].sqrt(), s[1].sqrt(), s[2].sqrt()];
            let mut mid = [0.0; 3];
            for i in 0..3 {
                mid[i] = s[i] * self.half_decay + dz[i];
            }
            let root_b = [mid[0].sqrt(), mid[1].sqrt(), mid[2].sqrt()];
            for i in 0..3 {
                for j in i..3 {
                    cross[i][j] +=
                        (root_a[i] * root_a[j] + root_b[i] * root_b[j]) * self.half_weight;
                }
            }
            for i in 0..3 {
                let var_a = s[i] * self.half_weight;
                let var_b = mid[i] * self.half_weight;
                let b = self.drift[i] * self.dt - 0.5 * (var_a + var_b);
                drift_int[i] += b;
                x[i] += b + var_a.sqrt() * n1[i] + var_b.sqrt() * n2[i] + self.rho[i] * dz1;
                s[i] = mid[i] * self.half_decay;
            }
            let c = dz1 - self.comp;
            jqv += c * c;
            min_var = min_var.min(s[0]).min(s[1]).min(s[2]);
            if let Some(tr) = trajectory.as_mut() {
                tr.push(StepRecord {
                    sigma_sq: s,
                    log_price: x,
                    dz: [dz1, dzs, dzss],
                });
            }
        }
        let mut realized = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in i..3 {
                let v = (self.gamma[i][j] * cross[i][j] + self.rho[i] * self.rho[j] * jqv)
                    / self.horizon;
                realized[i][j] = v;
                realized[j][i] = v;
            }
        }
        PathSummary {
            realized,
            terminal_log_price: x,
            terminal_variance: s,
            min_variance: min_var,
            drift_integral: drift_int,
            trajectory,
        }
    }
}

fn stream_rng(base: &ChaCha8Rng, stream: u64) -> ChaCha8Rng {
    let mut rng = base.clone();
    rng.set_stream(stream);
    rng.set_word_pos(0);
    rng
}

/// Simulates `config.n_paths` paths of the model over `[0, T]`.
pub fn simulate(params: &ModelParams, config: &SimulationConfig) -> Result<PathBundle> {
    let kernel = Kernel::new(params, config)?;
    let base = ChaCha8Rng::seed_from_u64(config.seed);
    let run = |k: usize| -> PathSummary {
        if config.antithetic {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            kernel.path(stream_rng(&base, (k / 2) as u64), sign)
        } else {
            kernel.path(stream_rng(&base, k as u64), 1.0)
        }
    };
    #[cfg(feature = "parallel")]
    let paths: Vec<PathSummary> = {
        use rayon::prelude::*;
        (0..config.n_paths).into_par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let paths: Vec<PathSummary> = (0..config.n_paths).map(run).collect();
    Ok(PathBundle {
        config: *config,
        horizon: params.horizon,
        paths,
    })
}

/// Sample mean of the per-path realized covariation, with per-entry
/// standard errors in the diagnostics.
pub fn expected_cov_from_bundle(bundle: &PathBundle) -> ExpectedCovMatrix {
    let mut entries = [[0.0; 3]; 3];
    let mut diagnostics: [[EntryDiagnostics; 3]; 3] = Default::default();
    for i in 0..3 {
        for j in 0..3 {
            let e = bundle.estimate(|p| p.realized[i][j]);
            entries[i][j] = e.mean;
            diagnostics[i][j].stderr = Some(e.stderr);
        }
    }
    ExpectedCovMatrix {
        entries,
        method: CovMethod::Mc,
        diagnostics,
    }
}

/// Monte Carlo estimate of the expected covariance matrix.
pub fn mc_expected_cov(
    params: &ModelParams,
    config: &SimulationConfig,
) -> Result<ExpectedCovMatrix> {
    Ok(expected_cov_from_bundle(&simulate(params, config)?))
}

/// Monte Carlo swap price. Eigenvalue swaps use weights fixed from the
/// approximation-route matrix and average `wᵀΩ_path w`.
pub fn mc_price(
    params: &ModelParams,
    contract: &SwapContract,
    config: &SimulationConfig,
) -> Result<PricingResult> {
    contract.validate()?;
    let mut diagnostics = PricingDiagnostics::default();
    if (contract.maturity - params.horizon).abs() > 1e-9 * params.horizon {
        diagnostics.warnings.push(alloc::format!(
            "contract maturity {} differs from the simulated horizon {}",
            contract.maturity,
            params.horizon
        ));
    }
    let bundle;
    let est = match contract.kind {
        SwapKind::Trace => {
            bundle = simulate(params, config)?;
            bundle.estimate(|p| p.realized[0][0] + p.realized[1][1] + p.realized[2][2])
        }
        SwapKind::MaxEigenvalue => {
            let analytic = covariance::expected_cov_matrix(params, CovMethod::Approx)?;
            let mu = [
                params.assets[0].mu,
                params.assets[1].mu,
                params.assets[2].mu,
            ];
            let (fw, report) = pricing::eigen_weights(&analytic.entries, mu, contract)?;
            diagnostics.weights = Some(report);
            bundle = simulate(params, config)?;
            bundle.estimate(|p| optimize::quadratic_form(&fw.w, &p.realized))
        }
    };
    let discount = contract.discount();
    diagnostics.stderr = Some(discount * est.stderr);
    Ok(PricingResult {
        price: discount * (est.mean - contract.strike),
        expected_metric: est.mean,
        discount,
        method: CovMethod::Mc,
        diagnostics,
    })
}

/// Serializable summary of a Monte Carlo covariance estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McSummary {
    /// Entry means, row-major.
    pub mean: Vec<f64>,
    /// Entry standard errors, row-major.
    pub stderr: Vec<f64>,
    /// Paths simulated.
    pub n_paths: usize,
    /// Steps per path.
    pub n_steps: usize,
    /// Seed.
    pub seed: u64,
    /// Antithetic pairing.
    pub antithetic: bool,
}

impl McSummary {
    /// Builds the summary from an MC matrix and its configuration.
    pub fn new(cov: &ExpectedCovMatrix, config: &SimulationConfig) -> Self {
        let mut mean = Vec::with_capacity(9);
        let mut stderr = Vec::with_capacity(9);
        for i in 0..3 {
            for j in 0..3 {
                mean.push(cov.entries[i][j]);
                stderr.push(cov.diagnostics[i][j].stderr.unwrap_or(f64::NAN));
            }
        }
        McSummary {
            mean,
            stderr,
            n_paths: config.n_paths,
            n_steps: config.n_steps,
            seed: config.seed,
            antithetic: config.antithetic,
        }
    }
}
