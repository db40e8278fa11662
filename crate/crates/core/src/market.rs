//! Return series, descriptive statistics and parameter estimation.
//!
//! Estimators are plain sample moments:
//!
//! * `μᵢ`, `σᵢ,₀²`: sample mean and unbiased variance of the simple returns;
//! * `Γ`: sample correlation matrix of the returns;
//! * `r₂, r₃`: sample correlations of the squared demeaned returns with those
//!   of asset 1, read as stationary volatility correlations and inverted for
//!   the loadings (clamped to `[0, 1]`);
//! * `λ = −ln(acf₁)` where `acf₁` is the lag-1 autocorrelation of squared
//!   demeaned returns, averaged over the three assets and clamped to
//!   `[1e−6, 1 − 1e−6]`.
//!
//! Anything present in [`ParamOverrides`] replaces the estimate, and a
//! field that is overridden is never estimated (so degenerate data only
//! fails for fields that are actually needed).

use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float as _;
use serde::{Deserialize, Serialize};

use crate::covariance::{AssetParams, BetaBounds, JumpTerm, ModelParams};
use crate::levy::{loading_from_stationary_correlation, CorrelatedTriple, SubordinatorSpec};
use crate::{Error, Result};

/// Prices of one asset and their simple returns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnSeries {
    /// Asset label.
    pub asset_id: String,
    /// Ascending ISO dates.
    pub dates: Vec<String>,
    /// Positive prices.
    pub prices: Vec<f64>,
    /// `prices[t+1]/prices[t] − 1`.
    pub returns: Vec<f64>,
}

impl ReturnSeries {
    /// Builds the series; needs at least two positive prices.
    pub fn from_prices(
        asset_id: impl Into<String>,
        dates: Vec<String>,
        prices: Vec<f64>,
    ) -> Result<Self> {
        let asset_id = asset_id.into();
        if dates.len() != prices.len() {
            return Err(Error::Data(alloc::format!(
                "{asset_id}: {} dates but {} prices",
                dates.len(),
                prices.len()
            )));
        }
        if prices.len() < 2 {
            return Err(Error::Data(alloc::format!(
                "{asset_id}: need at least 2 prices, got {}",
                prices.len()
            )));
        }
        if let Some((k, p)) = prices
            .iter()
            .enumerate()
            .find(|(_, p)| !(**p > 0.0 && p.is_finite()))
        {
            return Err(Error::Data(alloc::format!(
                "{asset_id}: price {p} at row {k} is not positive"
            )));
        }
        let returns = prices.windows(2).map(|w| w[1] / w[0] - 1.0).collect();
        Ok(ReturnSeries {
            asset_id,
            dates,
            prices,
            returns,
        })
    }
}

/// One input row: a date and up to three prices.
pub type PriceRow = (String, [Option<f64>; 3]);

/// Drops incomplete rows, sorts by date and splits into three series.
///
/// Dates must already be ISO `YYYY-MM-DD`, so lexicographic order is
/// chronological.
pub fn series_from_rows(names: [&str; 3], mut rows: Vec<PriceRow>) -> Result<[ReturnSeries; 3]> {
    rows.retain(|(_, p)| p.iter().all(Option::is_some));
    rows.sort_by(|a, b| a.0.cmp(&b.0));
    if let Some(w) = rows.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(Error::Data(alloc::format!("duplicate date {}", w[0].0)));
    }
    if rows.len() < 2 {
        return Err(Error::Data(alloc::format!(
            "need at least 2 complete rows, got {}",
            rows.len()
        )));
    }
    let dates: Vec<String> = rows.iter().map(|r| r.0.clone()).collect();
    let column =
        |k: usize| -> Vec<f64> { rows.iter().map(|r| r.1[k].unwrap_or(f64::NAN)).collect() };
    Ok([
        ReturnSeries::from_prices(names[0], dates.clone(), column(0))?,
        ReturnSeries::from_prices(names[1], dates.clone(), column(1))?,
        ReturnSeries::from_prices(names[2], dates, column(2))?,
    ])
}

/// Summary statistics of a return series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DescriptiveStats {
    /// Sample size.
    pub n: usize,
    /// Sample mean.
    pub mean: f64,
    /// `stdDev/√n`.
    pub std_error: f64,
    /// `1.96·stdDev/√n`.
    pub ci95_half_width: f64,
    /// Minimum.
    pub min: f64,
    /// Maximum.
    pub max: f64,
    /// `max − min`.
    pub range: f64,
    /// Median (mean of the two middle values for even `n`).
    pub median: f64,
    /// Unbiased sample standard deviation.
    pub std_dev: f64,
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn covariance(x: &[f64], y: &[f64]) -> f64 {
    let (mx, my) = (mean(x), mean(y));
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - mx) * (b - my))
        .sum::<f64>()
        / (x.len() as f64 - 1.0)
}

fn correlation(x: &[f64], y: &[f64]) -> Option<f64> {
    let d = (covariance(x, x) * covariance(y, y)).sqrt();
    (d > 0.0).then(|| (covariance(x, y) / d).clamp(-1.0, 1.0))
}

/// Descriptive statistics; needs `n ≥ 2`.
pub fn descriptive_stats(returns: &[f64]) -> Result<DescriptiveStats> {
    let n = returns.len();
    if n < 2 {
        return Err(Error::Data(alloc::format!(
            "descriptive statistics need n >= 2, got {n}"
        )));
    }
    if returns.iter().any(|r| !r.is_finite()) {
        return Err(Error::Data("non-finite return".into()));
    }
    let mut sorted = returns.to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    };
    let std_dev = covariance(returns, returns).sqrt();
    let std_error = std_dev / (n as f64).sqrt();
    let (min, max) = (sorted[0], sorted[n - 1]);
    Ok(DescriptiveStats {
        n,
        mean: mean(returns),
        std_error,
        ci95_half_width: 1.96 * std_error,
        min,
        max,
        range: max - min,
        median,
        std_dev,
    })
}

/// Optional replacements for estimated or defaulted fields.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamOverrides {
    /// Expected returns.
    #[serde(default)]
    pub mu: Option<[f64; 3]>,
    /// Initial variances.
    #[serde(default)]
    pub sigma0_sq: Option<[f64; 3]>,
    /// Leverage parameters (default 0).
    #[serde(default)]
    pub rho: Option<[f64; 3]>,
    /// Brownian correlation matrix.
    #[serde(default)]
    pub gamma: Option<[[f64; 3]; 3]>,
    /// Loading of asset 2 on `Z¹`.
    #[serde(default)]
    pub r2: Option<f64>,
    /// Loading of asset 3 on `Z¹`.
    #[serde(default)]
    pub r3: Option<f64>,
    /// Mean-reversion rate per day.
    #[serde(default)]
    pub lambda: Option<f64>,
    /// Risk-free rate per day (default 0).
    #[serde(default)]
    pub rate: Option<f64>,
    /// Horizon in days (default 252).
    #[serde(default)]
    pub horizon: Option<f64>,
    /// Law of `Z¹` (default Gamma(1,1)).
    #[serde(default)]
    pub z1: Option<SubordinatorSpec>,
    /// Law of `Z*` (default Gamma(1,1)).
    #[serde(default)]
    pub z_star: Option<SubordinatorSpec>,
    /// Law of `Z**` (default Gamma(1,1)).
    #[serde(default)]
    pub z_star_star: Option<SubordinatorSpec>,
    /// Series centre.
    #[serde(default)]
    pub beta: Option<BetaBounds>,
    /// Series truncation order.
    #[serde(default)]
    pub kmax: Option<u32>,
    /// Jump-term convention.
    #[serde(default)]
    pub jump_term: Option<JumpTerm>,
}

fn demeaned_squares(x: &[f64]) -> Vec<f64> {
    let m = mean(x);
    x.iter().map(|r| (r - m) * (r - m)).collect()
}

fn lag1_autocorrelation(x: &[f64]) -> Option<f64> {
    let m = mean(x);
    let den: f64 = x.iter().map(|v| (v - m) * (v - m)).sum();
    if !(den > 0.0) {
        return None;
    }
    let num: f64 = x.windows(2).map(|w| (w[0] - m) * (w[1] - m)).sum();
    Some(num / den)
}

fn check_aligned(series: &[ReturnSeries; 3]) -> Result<usize> {
    let n = series[0].returns.len();
    if series.iter().any(|s| s.returns.len() != n) {
        return Err(Error::Data("return series are not aligned".into()));
    }
    if n < 3 {
        return Err(Error::Estimation(alloc::format!(
            "need at least 3 returns, got {n}"
        )));
    }
    Ok(n)
}

fn degenerate(what: &str, asset: &str) -> Error {
    Error::Estimation(alloc::format!("{what}: series {asset} has zero variance"))
}

/// Estimates [`ModelParams`] from three aligned return series.
pub fn estimate_params(
    series: &[ReturnSeries; 3],
    overrides: &ParamOverrides,
) -> Result<ModelParams> {
    check_aligned(series)?;
    let ret = |i: usize| series[i].returns.as_slice();

    let mu = overrides
        .mu
        .unwrap_or_else(|| [mean(ret(0)), mean(ret(1)), mean(ret(2))]);
    let sigma0_sq = match overrides.sigma0_sq {
        Some(v) => v,
        None => {
            let v = [
                covariance(ret(0), ret(0)),
                covariance(ret(1), ret(1)),
                covariance(ret(2), ret(2)),
            ];
            if let Some(i) = (0..3).find(|&i| !(v[i] > 0.0)) {
                return Err(degenerate("initial variance", &series[i].asset_id));
            }
            v
        }
    };
    let gamma = match overrides.gamma {
        Some(g) => g,
        None => {
            let mut g = [[1.0; 3]; 3];
            for i in 0..3 {
                for j in i + 1..3 {
                    let c = correlation(ret(i), ret(j)).ok_or_else(|| {
                        let k = if covariance(ret(i), ret(i)) > 0.0 {
                            j
                        } else {
                            i
                        };
                        degenerate("return correlation", &series[k].asset_id)
                    })?;
                    g[i][j] = c;
                    g[j][i] = c;
                }
            }
            g
        }
    };

    let z1 = overrides.z1.unwrap_or_default();
    let z_star = overrides.z_star.unwrap_or_default();
    let z_star_star = overrides.z_star_star.unwrap_or_default();
    let squares: Vec<Vec<f64>> =
        if overrides.r2.is_none() || overrides.r3.is_none() || overrides.lambda.is_none() {
            (0..3).map(|i| demeaned_squares(ret(i))).collect()
        } else {
            Vec::new()
        };
    let loading = |j: usize, idio: &SubordinatorSpec| -> Result<f64> {
        let rho = correlation(&squares[0], &squares[j]).ok_or_else(|| {
            let k = if covariance(&squares[0], &squares[0]) > 0.0 {
                j
            } else {
                0
            };
            degenerate("squared-return correlation", &series[k].asset_id)
        })?;
        Ok(loading_from_stationary_correlation(
            rho,
            z1.cumulant_of_order(2),
            idio.cumulant_of_order(2),
        ))
    };
    let r2 = match overrides.r2 {
        Some(r) => r,
        None => loading(1, &z_star)?,
    };
    let r3 = match overrides.r3 {
        Some(r) => r,
        None => loading(2, &z_star_star)?,
    };
    let lambda = match overrides.lambda {
        Some(l) => l,
        None => {
            let mut acc = 0.0;
            for (i, sq) in squares.iter().enumerate() {
                acc += lag1_autocorrelation(sq).ok_or_else(|| {
                    degenerate("squared-return autocorrelation", &series[i].asset_id)
                })?;
            }
            -(acc / 3.0).clamp(1e-6, 1.0 - 1e-6).ln()
        }
    };

    let rho = overrides.rho.unwrap_or([0.0; 3]);
    let params = ModelParams {
        assets: [0, 1, 2].map(|i| AssetParams {
            mu: mu[i],
            sigma0_sq: sigma0_sq[i],
            rho: rho[i],
        }),
        lambda,
        gamma,
        triple: CorrelatedTriple {
            r2,
            r3,
            z1,
            z_star,
            z_star_star,
        },
        rate: overrides.rate.unwrap_or(0.0),
        horizon: overrides.horizon.unwrap_or(252.0),
        beta: overrides.beta.unwrap_or_default(),
        kmax: overrides.kmax.unwrap_or(8),
        jump_term: overrides.jump_term.unwrap_or_default(),
    };
    params.validate()?;
    Ok(params)
}
