//! Trace and max-eigenvalue swap prices: `e^{−rT}·(metric − K)`.

use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float as _;
use serde::{Deserialize, Serialize};

use crate::covariance::{CovMethod, ExpectedCovMatrix};
use crate::optimize::{self, FeasibleWeights};
use crate::{Error, Result};

/// Which metric of the realized covariance matrix the swap pays.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SwapKind {
    /// `tr Ω`.
    Trace,
    /// `max wᵀΩw` under the target-return constraints.
    MaxEigenvalue,
}

/// A generalized variance swap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwapContract {
    /// Payoff metric.
    pub kind: SwapKind,
    /// Strike in variance units.
    pub strike: f64,
    /// Maturity in days.
    pub maturity: f64,
    /// Discount rate per day.
    pub rate: f64,
    /// Target portfolio return `k` (max-eigenvalue swaps only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_return: Option<f64>,
    /// Use the reference-example basis instead of the QR construction.
    #[serde(default, skip_serializing_if = "core::ops::Not::not")]
    pub reproduction: bool,
}

impl SwapContract {
    /// Checks `T > 0`, `K ≥ 0` and finiteness.
    pub fn validate(&self) -> Result<()> {
        if !(self.maturity > 0.0 && self.maturity.is_finite()) {
            return Err(Error::Argument(alloc::format!(
                "maturity must be positive, got {}",
                self.maturity
            )));
        }
        if !(self.strike >= 0.0 && self.strike.is_finite()) {
            return Err(Error::Argument(alloc::format!(
                "strike must be nonnegative, got {}",
                self.strike
            )));
        }
        if !self.rate.is_finite() {
            return Err(Error::Argument("rate must be finite".into()));
        }
        Ok(())
    }

    /// `e^{−rT}`.
    pub fn discount(&self) -> f64 {
        (-self.rate * self.maturity).exp()
    }
}

/// Printed basis and weight coordinates of the reference three-commodity
/// example. The basis is not orthogonal; it exists only so that the
/// published eigenvalue-swap price can be regenerated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReproductionBasis {
    /// Printed `P`, row-major.
    pub p: [[f64; 3]; 3],
    /// Printed `F = (q₁, q₂, rmag)`.
    pub f: [f64; 3],
}

impl ReproductionBasis {
    /// The values as printed in the reference example.
    pub const REFERENCE_EXAMPLE: ReproductionBasis = ReproductionBasis {
        p: [
            [-0.119, 0.7359, 0.6874],
            [0.9929, 0.0925, 0.0747],
            [-0.0063, 0.6707, 0.7417],
        ],
        f: [0.0219, 0.6543, 0.7559],
    };
}

/// Origin of the eigenvalue-swap weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisKind {
    /// Orthonormal QR basis with two-sign maximization.
    Qr,
    /// The printed reference basis.
    Reproduction,
}

/// Weights used by an eigenvalue-swap price and how well they satisfy
/// the constraints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightsReport {
    /// Basis construction.
    pub basis: BasisKind,
    /// Weight vector `w`.
    pub w: [f64; 3],
    /// Coordinates `F`.
    pub f: [f64; 3],
    /// Quadratic form at the rejected sign (QR basis only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub other_sign_lambda: Option<f64>,
    /// `(μᵀw − k, 1ᵀw − 1)`.
    pub constraint_residual: [f64; 2],
    /// `wᵀw − 1`.
    pub norm_residual: f64,
}

/// Extra information attached to a price.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct PricingDiagnostics {
    /// Error indicator propagated from the covariance entries.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metric_error: Option<f64>,
    /// Monte Carlo standard error of the price.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stderr: Option<f64>,
    /// Series truncation order, when the series route was used.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kmax: Option<u32>,
    /// Eigenvalue-swap weights.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weights: Option<WeightsReport>,
    /// Warnings.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// A swap price with its components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PricingResult {
    /// `discount·(expected_metric − strike)`.
    pub price: f64,
    /// `E[tr Ω]` or `E[λ]`.
    pub expected_metric: f64,
    /// `e^{−rT}`.
    pub discount: f64,
    /// Route behind the covariance matrix.
    pub method: CovMethod,
    /// Diagnostics.
    pub diagnostics: PricingDiagnostics,
}

fn result(
    metric: f64,
    contract: &SwapContract,
    method: CovMethod,
    diagnostics: PricingDiagnostics,
) -> PricingResult {
    let discount = contract.discount();
    PricingResult {
        price: discount * (metric - contract.strike),
        expected_metric: metric,
        discount,
        method,
        diagnostics,
    }
}

/// `e^{−rT}·(Σᵢ Ωᵢᵢ − K)`.
pub fn price_trace(cov: &ExpectedCovMatrix, contract: &SwapContract) -> Result<PricingResult> {
    contract.validate()?;
    if contract.kind != SwapKind::Trace {
        return Err(Error::Argument("price_trace needs a trace contract".into()));
    }
    let err: f64 = (0..3).map(|i| cov.diagnostics[i][i].magnitude()).sum();
    let diagnostics = PricingDiagnostics {
        metric_error: Some(err),
        ..Default::default()
    };
    Ok(result(cov.trace(), contract, cov.method, diagnostics))
}

fn weights_report(basis: BasisKind, w: &FeasibleWeights, mu: &[f64; 3], k: f64) -> WeightsReport {
    let ww = w.w;
    WeightsReport {
        basis,
        w: ww,
        f: w.f,
        other_sign_lambda: (basis == BasisKind::Qr).then_some(w.other_sign_lambda),
        constraint_residual: [
            mu[0] * ww[0] + mu[1] * ww[1] + mu[2] * ww[2] - k,
            ww[0] + ww[1] + ww[2] - 1.0,
        ],
        norm_residual: ww[0] * ww[0] + ww[1] * ww[1] + ww[2] * ww[2] - 1.0,
    }
}

/// Weights of an eigenvalue swap: QR construction, or the printed basis
/// in reproduction mode.
pub fn eigen_weights(
    omega: &[[f64; 3]; 3],
    mu: [f64; 3],
    contract: &SwapContract,
) -> Result<(FeasibleWeights, WeightsReport)> {
    let k = contract
        .target_return
        .ok_or_else(|| Error::Argument("max-eigenvalue contract needs target_return".into()))?;
    if contract.reproduction {
        let b = ReproductionBasis::REFERENCE_EXAMPLE;
        let w = optimize::mat_vec(&b.p, &b.f);
        let lambda = optimize::quadratic_form(&w, omega);
        let fw = FeasibleWeights {
            q: [b.f[0], b.f[1]],
            rmag: b.f[2],
            f: b.f,
            w,
            lambda_value: lambda,
            other_sign_lambda: f64::NAN,
            sign: 1.0,
        };
        let report = weights_report(BasisKind::Reproduction, &fw, &mu, k);
        return Ok((fw, report));
    }
    let basis = optimize::qr_constraint_basis(mu, k)?;
    let fw = optimize::feasible_weights(&basis, omega)?;
    let report = weights_report(BasisKind::Qr, &fw, &mu, k);
    Ok((fw, report))
}

/// `e^{−rT}·(λ − K)` with `λ = wᵀΩw` for the constrained maximizing `w`.
pub fn price_eigenvalue(
    cov: &ExpectedCovMatrix,
    mu: [f64; 3],
    contract: &SwapContract,
) -> Result<PricingResult> {
    contract.validate()?;
    if contract.kind != SwapKind::MaxEigenvalue {
        return Err(Error::Argument(
            "price_eigenvalue needs a max-eigenvalue contract".into(),
        ));
    }
    let (fw, report) = eigen_weights(&cov.entries, mu, contract)?;
    let mut err = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            err += (fw.w[i] * fw.w[j]).abs() * cov.diagnostics[i][j].magnitude();
        }
    }
    let mut diagnostics = PricingDiagnostics {
        metric_error: Some(err),
        weights: Some(report),
        ..Default::default()
    };
    if contract.reproduction {
        diagnostics.warnings.push(alloc::format!(
            "reproduction basis is not orthogonal: w'w - 1 = {:.4}, sum(w) - 1 = {:.4}",
            report.norm_residual,
            report.constraint_residual[1]
        ));
    }
    Ok(result(fw.lambda_value, contract, cov.method, diagnostics))
}

/// Dispatches on the contract kind.
pub fn price(
    cov: &ExpectedCovMatrix,
    mu: [f64; 3],
    contract: &SwapContract,
) -> Result<PricingResult> {
    match contract.kind {
        SwapKind::Trace => price_trace(cov, contract),
        SwapKind::MaxEigenvalue => price_eigenvalue(cov, mu, contract),
    }
}
