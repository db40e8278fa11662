//! `bns-swap`: calibrate BNS parameters from prices, price generalized
//! variance swaps and check the analytic routes against Monte Carlo.
//!
//! ```text
//! bns-swap calibrate --prices prices.csv --overrides overrides.json --out params.json
//! bns-swap price --params params.json --contract trace.json --method approx
//! bns-swap price --params params.json --contract eigen.json --method fixture-omega --omega omega.json
//! bns-swap verify --params params.json --paths 100000 --steps 2520 --seed 7
//! ```
//!
//! Exit codes: 0 success, 1 numerical failure, 2 input error, 3 estimation
//! error, 4 infeasible contract, 5 verification failure.

mod io;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::anyhow;
use bns_swap_core::covariance::{self, ModelParams};
use bns_swap_core::market::{self, ParamOverrides};
use bns_swap_core::mc::{self, McSummary, SimulationConfig, DEFAULT_STEPS};
use bns_swap_core::pricing::{self, SwapContract};
use bns_swap_core::{CovMethod, Error, ExpectedCovMatrix};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(
    name = "bns-swap",
    version,
    about = "Generalized variance swaps under the BNS model"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate model parameters from a CSV of closing prices
    Calibrate {
        /// CSV with header date,asset1,asset2,asset3
        #[arg(long)]
        prices: PathBuf,
        /// JSON object replacing estimated or default fields
        #[arg(long)]
        overrides: Option<PathBuf>,
        /// Where to write the parameter JSON
        #[arg(long)]
        out: PathBuf,
    },
    /// Price a trace or max-eigenvalue swap
    Price {
        /// Model parameter JSON (needed unless a trace swap is priced off a fixed matrix)
        #[arg(long)]
        params: Option<PathBuf>,
        /// Contract JSON
        #[arg(long)]
        contract: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Approx)]
        method: Method,
        /// 3x3 covariance matrix JSON for --method fixture-omega
        #[arg(long)]
        omega: Option<PathBuf>,
    },
    /// Compare both analytic routes with the Monte Carlo oracle
    Verify {
        #[arg(long)]
        params: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        paths: usize,
        #[arg(long, default_value_t = DEFAULT_STEPS)]
        steps: usize,
        #[arg(long, env = "BNS_SWAP_SEED", default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        antithetic: bool,
        /// Largest tolerated |z|
        #[arg(long, default_value_t = 4.0)]
        max_z: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Series,
    Approx,
    FixtureOmega,
}

/// A failure carrying its exit code.
#[derive(Debug)]
pub enum Failure {
    Numerical(anyhow::Error),
    Input(anyhow::Error),
    Estimation(anyhow::Error),
    Infeasible(anyhow::Error),
    Verification(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Numerical(_) => 1,
            Failure::Input(_) => 2,
            Failure::Estimation(_) => 3,
            Failure::Infeasible(_) => 4,
            Failure::Verification(_) => 5,
        }
    }

    fn message(&self) -> &anyhow::Error {
        match self {
            Failure::Numerical(e)
            | Failure::Input(e)
            | Failure::Estimation(e)
            | Failure::Infeasible(e)
            | Failure::Verification(e) => e,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Estimation(_) => Failure::Estimation(e.into()),
            Error::InfeasibleTarget { .. } | Error::RankDeficient => Failure::Infeasible(e.into()),
            Error::Numerical { .. } => Failure::Numerical(e.into()),
            _ => Failure::Input(e.into()),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Input(e)
    }
}

#[derive(Serialize)]
struct RunReport {
    command: &'static str,
    version: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    wall_time_seconds: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    params: Option<ModelParams>,
    results: Value,
    diagnostics: Value,
}

impl RunReport {
    fn new(
        command: &'static str,
        params: Option<ModelParams>,
        results: Value,
        diagnostics: Value,
    ) -> Self {
        RunReport {
            command,
            version: env!("CARGO_PKG_VERSION"),
            seed: None,
            wall_time_seconds: 0.0,
            params,
            results,
            diagnostics,
        }
    }
}

fn load_params(path: &PathBuf) -> Result<ModelParams, Failure> {
    let p: ModelParams = io::read_json(path)?;
    p.validate()
        .map_err(|e| Failure::Input(anyhow!("{}: {e}", path.display())))?;
    Ok(p)
}

fn calibrate(
    prices: &PathBuf,
    overrides: Option<&PathBuf>,
    out: &PathBuf,
) -> Result<RunReport, Failure> {
    let series = io::load_prices(prices)?;
    let overrides: ParamOverrides = match overrides {
        Some(path) => io::read_json(path)?,
        None => ParamOverrides::default(),
    };
    let mut stats = serde_json::Map::new();
    for s in &series {
        let d = market::descriptive_stats(&s.returns)?;
        stats.insert(
            s.asset_id.clone(),
            serde_json::to_value(d).map_err(anyhow::Error::from)?,
        );
    }
    let params = market::estimate_params(&series, &overrides)?;
    io::write_json(out, &params)?;
    let results = json!({
        "out": out.display().to_string(),
        "rows": series[0].prices.len(),
        "first_date": series[0].dates.first(),
        "last_date": series[0].dates.last(),
        "descriptive_stats": stats,
    });
    Ok(RunReport::new(
        "calibrate",
        Some(params),
        results,
        json!({ "warnings": params.warnings() }),
    ))
}

fn price(
    params: Option<&PathBuf>,
    contract: &PathBuf,
    method: Method,
    omega: Option<&PathBuf>,
) -> Result<RunReport, Failure> {
    let contract: SwapContract = io::read_json(contract)?;
    contract.validate()?;
    let params = params.map(load_params).transpose()?;
    let cov: ExpectedCovMatrix = match method {
        Method::FixtureOmega => {
            let path = omega
                .ok_or_else(|| Failure::Input(anyhow!("--method fixture-omega needs --omega")))?;
            let entries: [[f64; 3]; 3] = io::read_json(path)?;
            ExpectedCovMatrix::from_entries(entries)
                .map_err(|e| Failure::Input(anyhow!("{}: {e}", path.display())))?
        }
        Method::Series | Method::Approx => {
            let p = params
                .as_ref()
                .ok_or_else(|| Failure::Input(anyhow!("--params is required for this method")))?;
            let m = if matches!(method, Method::Series) {
                CovMethod::Series
            } else {
                CovMethod::Approx
            };
            covariance::expected_cov_matrix(p, m)?
        }
    };
    let mu = match (&params, contract.kind) {
        (Some(p), _) => [p.assets[0].mu, p.assets[1].mu, p.assets[2].mu],
        (None, pricing::SwapKind::Trace) => [0.0; 3],
        (None, pricing::SwapKind::MaxEigenvalue) => {
            return Err(Failure::Input(anyhow!(
                "a max-eigenvalue swap needs --params for the expected returns"
            )));
        }
    };
    let mut warnings = params
        .as_ref()
        .map(ModelParams::warnings)
        .unwrap_or_default();
    if let Some(p) = &params {
        if (p.horizon - contract.maturity).abs() > 1e-9 * contract.maturity {
            warnings.push(format!(
                "contract maturity {} differs from the model horizon {}",
                contract.maturity, p.horizon
            ));
        }
    }
    let result = pricing::price(&cov, mu, &contract)?;
    let results = json!({ "contract": contract, "covariance": cov, "pricing": result });
    Ok(RunReport::new(
        "price",
        params,
        results,
        json!({ "warnings": warnings }),
    ))
}

/// `(analytic − mc)/stderr`. Differences within the analytic tolerance count
/// as agreement, so a degenerate model with zero Monte Carlo noise gives 0;
/// any other difference with zero standard error gives ±∞.
fn z_score(analytic: f64, mc: f64, stderr: f64) -> f64 {
    let diff = analytic - mc;
    if diff.abs() <= 1e-8 * analytic.abs().max(mc.abs()) {
        0.0
    } else if stderr > 0.0 {
        diff / stderr
    } else {
        diff.signum() * f64::INFINITY
    }
}

fn verify(params: &PathBuf, config: SimulationConfig, max_z: f64) -> Result<RunReport, Failure> {
    let p = load_params(params)?;
    let mc_cov = mc::mc_expected_cov(&p, &config)?;
    let mut routes = serde_json::Map::new();
    let mut worst: f64 = 0.0;
    let mut failed = Vec::new();
    for (name, method) in [("series", CovMethod::Series), ("approx", CovMethod::Approx)] {
        match covariance::expected_cov_matrix(&p, method) {
            Ok(cov) => {
                let mut z = [[0.0; 3]; 3];
                for i in 0..3 {
                    for j in 0..3 {
                        let se = mc_cov.diagnostics[i][j].stderr.unwrap_or(f64::NAN);
                        z[i][j] = z_score(cov.entries[i][j], mc_cov.entries[i][j], se);
                        worst = worst.max(z[i][j].abs());
                    }
                }
                if z.iter().flatten().any(|v| !(v.abs() <= max_z)) {
                    failed.push(name);
                }
                // JSON has no infinity; report those as strings
                let z_json: Vec<Value> = z
                    .iter()
                    .flatten()
                    .map(|v| {
                        if v.is_finite() {
                            json!(v)
                        } else {
                            json!(v.to_string())
                        }
                    })
                    .collect();
                routes.insert(name.into(), json!({ "entries": cov, "z_scores": z_json }));
            }
            Err(e) => {
                failed.push(name);
                routes.insert(name.into(), json!({ "error": e.to_string() }));
            }
        }
    }
    let results = json!({
        "mc": McSummary::new(&mc_cov, &config),
        "routes": routes,
        "max_abs_z": if worst.is_finite() { json!(worst) } else { json!(worst.to_string()) },
        "max_z": max_z,
        "failed_routes": failed,
    });
    let mut report = RunReport::new(
        "verify",
        Some(p),
        results,
        json!({ "warnings": p.warnings() }),
    );
    report.seed = Some(config.seed);
    if failed.is_empty() {
        Ok(report)
    } else {
        let text = io::to_json(&report).map_err(Failure::Numerical)?;
        print!("{text}");
        Err(Failure::Verification(anyhow!(
            "routes outside |z| <= {max_z}: {}",
            failed.join(", ")
        )))
    }
}

fn run(cli: Cli) -> Result<RunReport, Failure> {
    let start = Instant::now();
    let mut report = match cli.command {
        Command::Calibrate {
            prices,
            overrides,
            out,
        } => calibrate(&prices, overrides.as_ref(), &out)?,
        Command::Price {
            params,
            contract,
            method,
            omega,
        } => price(params.as_ref(), &contract, method, omega.as_ref())?,
        Command::Verify {
            params,
            paths,
            steps,
            seed,
            antithetic,
            max_z,
        } => {
            let config = SimulationConfig {
                n_paths: paths,
                n_steps: steps,
                seed,
                antithetic,
                record_paths: false,
            };
            verify(&params, config, max_z)?
        }
    };
    report.wall_time_seconds = start.elapsed().as_secs_f64();
    Ok(report)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli).and_then(|r| io::to_json(&r).map_err(Failure::Numerical)) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {:#}", f.message());
            ExitCode::from(f.code())
        }
    }
}
