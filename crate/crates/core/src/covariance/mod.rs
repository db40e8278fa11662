//! The expected covariance matrix of log-returns.
//!
//! Entry `(i, j)` is `E[(1/T)[Xⁱ, Xʲ]_T]`:
//!
//! * diagonal: `(1/T)∫₀ᵀ E[σᵢ²]_t dt + ρᵢ²λκ¹₂`;
//! * off-diagonal: `γᵢⱼ/T·∫₀ᵀ E[σᵢσⱼ]_t dt + ρᵢρⱼλκ¹₂`,
//!
//! where `E[σᵢσⱼ]_t` comes from either the binomial series ([`series`]) or
//! the second-order approximation ([`approx`]). The time integral is an
//! adaptive Simpson [`quadrature`] with tolerance `1e−10·T`.

use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float as _;
use serde::{Deserialize, Serialize};

pub mod approx;
mod params;
pub mod quadrature;
pub mod series;

pub use params::{AssetParams, BetaBounds, JumpTerm, ModelParams, Pair};
pub use quadrature::{quadrature, Quadrature};

use crate::levy::Cumulants;
use crate::moments::{Frame, ShiftedExpIntegral};
use crate::{Error, Result};

/// Relative size of the integrated last series term above which a
/// truncation warning is recorded.
pub const SERIES_TAIL_TOLERANCE: f64 = 1e-6;

/// How an [`ExpectedCovMatrix`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovMethod {
    /// Binomial series route.
    Series,
    /// Second-order approximation route.
    Approx,
    /// Monte Carlo sample mean.
    Mc,
    /// Supplied externally.
    Fixture,
}

/// Per-entry diagnostics.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct EntryDiagnostics {
    /// Accumulated quadrature error estimate, on the entry's scale.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quadrature_error: Option<f64>,
    /// `|last retained series term|` at `t = 0`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub series_tail_t0: Option<f64>,
    /// `|last retained term| / |series sum|` at `t = 0`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub series_tail_t0_relative: Option<f64>,
    /// `(|γᵢⱼ|/T)∫|last retained term| dt`, on the entry's scale.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub series_tail_integral: Option<f64>,
    /// Monte Carlo standard error.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stderr: Option<f64>,
    /// Warnings raised while computing the entry.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl EntryDiagnostics {
    /// The largest available error indicator for the entry.
    pub fn magnitude(&self) -> f64 {
        [
            self.quadrature_error,
            self.series_tail_integral,
            self.stderr,
        ]
        .iter()
        .flatten()
        .fold(0.0, |acc: f64, v| acc.max(v.abs()))
    }
}

/// One matrix entry with its diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct EntryEstimate {
    /// Entry value.
    pub value: f64,
    /// How trustworthy it is.
    pub diagnostics: EntryDiagnostics,
}

/// Symmetric 3×3 matrix of expected variances and covariances of
/// log-returns per unit time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectedCovMatrix {
    /// Entries, serialized row-major.
    #[serde(with = "row_major")]
    pub entries: [[f64; 3]; 3],
    /// Route that produced the entries.
    pub method: CovMethod,
    /// Per-entry diagnostics, serialized row-major.
    #[serde(with = "row_major")]
    pub diagnostics: [[EntryDiagnostics; 3]; 3],
}

impl ExpectedCovMatrix {
    /// Wraps an externally supplied matrix, checking symmetry and the
    /// sign of the diagonal.
    pub fn from_entries(entries: [[f64; 3]; 3]) -> Result<Self> {
        for i in 0..3 {
            if !(entries[i][i] >= 0.0) {
                return Err(Error::Argument(alloc::format!(
                    "diagonal entry {i} is negative"
                )));
            }
            for j in 0..3 {
                let (a, b) = (entries[i][j], entries[j][i]);
                if !a.is_finite() || (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1e-300) {
                    return Err(Error::Argument(
                        "covariance matrix must be finite and symmetric".into(),
                    ));
                }
            }
        }
        Ok(ExpectedCovMatrix {
            entries,
            method: CovMethod::Fixture,
            diagnostics: Default::default(),
        })
    }

    /// `Σᵢ Ωᵢᵢ`.
    pub fn trace(&self) -> f64 {
        (0..3).map(|i| self.entries[i][i]).sum()
    }
}

mod row_major {
    use alloc::vec::Vec;
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<T: Serialize, S: Serializer>(
        m: &[[T; 3]; 3],
        s: S,
    ) -> Result<S::Ok, S::Error> {
        let flat: Vec<&T> = m.iter().flat_map(|r| r.iter()).collect();
        flat.serialize(s)
    }

    pub fn deserialize<'de, T, D>(d: D) -> Result<[[T; 3]; 3], D::Error>
    where
        T: Deserialize<'de> + Default,
        D: Deserializer<'de>,
    {
        let flat: Vec<T> = Vec::deserialize(d)?;
        if flat.len() != 9 {
            return Err(D::Error::custom(alloc::format!(
                "expected 9 row-major values, got {}",
                flat.len()
            )));
        }
        let mut out: [[T; 3]; 3] = Default::default();
        for (k, v) in flat.into_iter().enumerate() {
            out[k / 3][k % 3] = v;
        }
        Ok(out)
    }
}

/// `σᵢ²_t = c + l·(Ỹ¹, Ỹ*, Ỹ**)` with `c = e^{−λt}σᵢ,₀²`.
pub(crate) fn variance_affine(params: &ModelParams, i: usize, t: f64) -> (f64, [f64; 3]) {
    let tr = &params.triple;
    let c = (-params.lambda * t).exp() * params.assets[i].sigma0_sq;
    match i {
        0 => (c, [1.0, 0.0, 0.0]),
        1 => (c, [tr.r2, tr.s2(), 0.0]),
        _ => (c, [tr.r3, 0.0, tr.s3()]),
    }
}

// Absolute tolerance on ∫₀ᵀ, scaled by the largest initial or stationary variance.
fn default_tol(params: &ModelParams) -> f64 {
    let scale = (0..3)
        .map(|i| {
            params.assets[i]
                .sigma0_sq
                .max(params.triple.asset(i).kappa(1))
        })
        .fold(0.0, f64::max);
    let scale = if scale > 0.0 { scale } else { 1.0 };
    1e-12 * params.horizon * scale
}

/// `E[σᵢ²]_t` using the derived subordinator of asset `i`.
pub fn expected_variance_at(i: usize, params: &ModelParams, t: f64) -> Result<f64> {
    let law = params.triple.asset(i);
    let m = ShiftedExpIntegral::new(
        params.assets[i].sigma0_sq,
        &law,
        params.lambda,
        t,
        1,
        Frame::Decayed,
    )?;
    Ok(m.cumulants()[0])
}

/// Diagonal entry `i` (0-based) with diagnostics.
pub fn var_leg_entry(i: usize, params: &ModelParams) -> Result<EntryEstimate> {
    if i >= 3 {
        return Err(Error::Argument(alloc::format!(
            "asset index {i} out of range"
        )));
    }
    params.validate()?;
    let law = params.triple.asset(i);
    let v0 = params.assets[i].sigma0_sq;
    let mut failure = None;
    let q = quadrature(
        |t| {
            // e^{−λt}·E[σᵢ,₀² + Y]
            match crate::moments::moment_b(v0, &law, params.lambda, t, 1) {
                Ok(m) => (-params.lambda * t).exp() * m,
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::NAN
                }
            }
        },
        0.0,
        params.horizon,
        default_tol(params),
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let q = q?;
    let t_inv = 1.0 / params.horizon;
    Ok(EntryEstimate {
        value: q.value * t_inv + params.jump_term_of(i, i),
        diagnostics: EntryDiagnostics {
            quadrature_error: Some(q.error * t_inv),
            ..Default::default()
        },
    })
}

/// `E[Var(Sⁱ)]`: the expected realized variance of asset `i` (0-based).
pub fn expected_var_leg(i: usize, params: &ModelParams) -> Result<f64> {
    Ok(var_leg_entry(i, params)?.value)
}

fn integrate_route<F>(params: &ModelParams, mut point: F) -> Result<Quadrature>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut failure = None;
    let q = quadrature(
        |t| match point(t) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        0.0,
        params.horizon,
        default_tol(params),
    );
    match failure {
        Some(e) => Err(e),
        None => q,
    }
}

/// Off-diagonal entry by the series route, with diagnostics.
pub fn series_entry(pair: Pair, params: &ModelParams) -> Result<EntryEstimate> {
    params.validate()?;
    if pair == Pair::P23 && !(params.triple.r2 > 0.0) {
        return Err(Error::Singular(
            "series for pair (2,3) divides by r2 = 0".into(),
        ));
    }
    let (i, j) = pair.indices();
    let gamma = params.gamma_of(pair);
    let jump = params.jump_term_of(i, j);
    let mut diag = EntryDiagnostics::default();
    let at0 = series::series_point(params, pair, 0.0)?;
    let x0 = params.assets[i].sigma0_sq * params.assets[j].sigma0_sq;
    if at0.centre > 0.0 && (x0 / at0.centre - 1.0).abs() >= 1.0 {
        return Err(Error::Argument(alloc::format!(
            "series argument at t = 0 is {:.6e}; the centre must satisfy |x| < 1",
            x0 / at0.centre - 1.0
        )));
    }
    diag.series_tail_t0 = Some(at0.last_term.abs());
    diag.series_tail_t0_relative = Some(if at0.value != 0.0 {
        (at0.last_term / at0.value).abs()
    } else {
        at0.last_term.abs()
    });
    if gamma == 0.0 {
        diag.quadrature_error = Some(0.0);
        diag.series_tail_integral = Some(0.0);
        return Ok(EntryEstimate {
            value: jump,
            diagnostics: diag,
        });
    }
    let q = integrate_route(params, |t| Ok(series::series_point(params, pair, t)?.value))?;
    let tail = integrate_route(params, |t| {
        Ok(series::series_point(params, pair, t)?.last_term.abs())
    })?;
    let scale = gamma.abs() / params.horizon;
    diag.quadrature_error = Some(q.error * scale);
    diag.series_tail_integral = Some(tail.value * scale);
    if tail.value > SERIES_TAIL_TOLERANCE * q.value.abs() {
        diag.warnings.push(alloc::format!(
            "series truncation tail {:.3e} exceeds {:.0e} of the integral {:.6e} (kmax = {})",
            tail.value,
            SERIES_TAIL_TOLERANCE,
            q.value,
            params.kmax
        ));
    }
    Ok(EntryEstimate {
        value: gamma / params.horizon * q.value + jump,
        diagnostics: diag,
    })
}

/// `E[Cov(Sⁱ, Sʲ)]` by the series route.
pub fn expected_cov_series(pair: Pair, params: &ModelParams) -> Result<f64> {
    Ok(series_entry(pair, params)?.value)
}

/// Off-diagonal entry by the approximation route, with diagnostics.
pub fn approx_entry(pair: Pair, params: &ModelParams) -> Result<EntryEstimate> {
    params.validate()?;
    let (i, j) = pair.indices();
    let gamma = params.gamma_of(pair);
    let jump = params.jump_term_of(i, j);
    if gamma == 0.0 {
        let diagnostics = EntryDiagnostics {
            quadrature_error: Some(0.0),
            ..Default::default()
        };
        return Ok(EntryEstimate {
            value: jump,
            diagnostics,
        });
    }
    let q = integrate_route(params, |t| approx::approx_point(params, pair, t))?;
    let diagnostics = EntryDiagnostics {
        quadrature_error: Some(q.error * gamma.abs() / params.horizon),
        ..Default::default()
    };
    Ok(EntryEstimate {
        value: gamma / params.horizon * q.value + jump,
        diagnostics,
    })
}

/// `E[Cov(Sⁱ, Sʲ)]` by the approximation route.
pub fn expected_cov_approx(pair: Pair, params: &ModelParams) -> Result<f64> {
    Ok(approx_entry(pair, params)?.value)
}

/// Full matrix by an analytic route (`Series` or `Approx`).
pub fn expected_cov_matrix(params: &ModelParams, method: CovMethod) -> Result<ExpectedCovMatrix> {
    params.validate()?;
    let mut entries = [[0.0; 3]; 3];
    let mut diagnostics: [[EntryDiagnostics; 3]; 3] = Default::default();
    for i in 0..3 {
        let e = var_leg_entry(i, params)?;
        entries[i][i] = e.value;
        diagnostics[i][i] = e.diagnostics;
    }
    for pair in Pair::ALL {
        let e = match method {
            CovMethod::Series => series_entry(pair, params)?,
            CovMethod::Approx => approx_entry(pair, params)?,
            other => {
                return Err(Error::Argument(alloc::format!(
                    "expected_cov_matrix supports the series and approx routes, not {other:?}"
                )))
            }
        };
        let (i, j) = pair.indices();
        entries[i][j] = e.value;
        entries[j][i] = e.value;
        diagnostics[i][j] = e.diagnostics.clone();
        diagnostics[j][i] = e.diagnostics;
    }
    Ok(ExpectedCovMatrix {
        entries,
        method,
        diagnostics,
    })
}

/// Closed form `σ²₀(1 − e^{−λT})/(λT)` of `(1/T)∫₀ᵀ σ²₀e^{−λt}dt`.
pub fn deterministic_average(v: f64, lambda: f64, horizon: f64) -> f64 {
    let lt = lambda * horizon;
    v * (-(-lt).exp_m1()) / lt
}

/// Mean-of-law helper: `κ¹₁` of the driver of asset `i`.
pub fn stationary_mean_variance(i: usize, params: &ModelParams) -> f64 {
    params.triple.asset(i).kappa(1)
}
