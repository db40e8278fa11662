use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float as _;
use serde::{Deserialize, Serialize};

use crate::levy::{CorrelatedTriple, Cumulants};
use crate::optimize::symmetric_eigenvalues;
use crate::{Error, Result};

/// Per-asset parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssetParams {
    /// Expected return per day (used by the target-return constraint).
    pub mu: f64,
    /// Initial variance `σ²₀` per day.
    pub sigma0_sq: f64,
    /// Leverage: loading of the log-price on the jumps of `Z¹`.
    pub rho: f64,
}

/// An unordered pair of distinct assets (0-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pair {
    /// Assets 1 and 2.
    #[serde(rename = "12")]
    P12,
    /// Assets 2 and 3.
    #[serde(rename = "23")]
    P23,
    /// Assets 3 and 1.
    #[serde(rename = "31")]
    P31,
}

impl Pair {
    /// All three pairs.
    pub const ALL: [Pair; 3] = [Pair::P12, Pair::P23, Pair::P31];

    /// The pair `{i, j}` for 0-based indices, in either order.
    pub fn new(i: usize, j: usize) -> Result<Self> {
        match (i.min(j), i.max(j)) {
            (0, 1) => Ok(Pair::P12),
            (1, 2) => Ok(Pair::P23),
            (0, 2) => Ok(Pair::P31),
            _ => Err(Error::Argument(alloc::format!(
                "({i}, {j}) is not a pair of distinct assets in 0..3"
            ))),
        }
    }

    /// 0-based indices with the lower index first.
    pub fn indices(self) -> (usize, usize) {
        match self {
            Pair::P12 => (0, 1),
            Pair::P23 => (1, 2),
            Pair::P31 => (0, 2),
        }
    }
}

/// Expansion centre of the square-root series.
///
/// The series expands `√X` for `X = σᵢ²σⱼ²` as `β²·√(1 + x)` with
/// `x = X/β⁴ − 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BetaBounds {
    /// `β² = max(σᵢ,₀², σⱼ,₀²) + 10·κ¹₂/(2λ)` for every pair.
    TenDeviation,
    /// `β⁴ = multiplier·E[σᵢ²σⱼ²]_t`, recomputed at every `t`.
    MomentMatched {
        /// Multiple of the mean used as the centre; must exceed 1/2.
        multiplier: f64,
    },
    /// Constant bounds `β` on the variances of each pair.
    Fixed {
        /// Bound for pair (1,2).
        b12: f64,
        /// Bound for pair (2,3).
        b23: f64,
        /// Bound for pair (3,1).
        b31: f64,
    },
}

impl Default for BetaBounds {
    fn default() -> Self {
        BetaBounds::TenDeviation
    }
}

impl BetaBounds {
    /// The ten-deviation bounds as explicit fixed values.
    pub fn ten_deviation_bounds(params: &ModelParams) -> Self {
        let extra = 10.0 * params.triple.z1.kappa(2) / (2.0 * params.lambda);
        let b = |i: usize, j: usize| {
            (params.assets[i].sigma0_sq.max(params.assets[j].sigma0_sq) + extra).sqrt()
        };
        BetaBounds::Fixed {
            b12: b(0, 1),
            b23: b(1, 2),
            b31: b(0, 2),
        }
    }
}

/// How the jump contribution enters the variance legs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JumpTerm {
    /// `ρᵢρⱼλκ¹₂` on every entry.
    #[default]
    Consistent,
    /// `ρᵢ²λκ¹₂/T` on the diagonal, `ρᵢρⱼλκ¹₂` off it.
    PerHorizonDiagonal,
}

fn default_kmax() -> u32 {
    8
}

/// The full three-asset parameter set. Time is measured in trading days.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    /// Per-asset drift, initial variance and leverage.
    pub assets: [AssetParams; 3],
    /// Mean-reversion rate of the variances, per day.
    pub lambda: f64,
    /// Brownian correlation matrix Γ.
    pub gamma: [[f64; 3]; 3],
    /// Subordinators and their loadings.
    pub triple: CorrelatedTriple,
    /// Risk-free rate per day.
    pub rate: f64,
    /// Horizon `T` in days.
    pub horizon: f64,
    /// Series expansion centre.
    #[serde(default)]
    pub beta: BetaBounds,
    /// Series truncation order.
    #[serde(default = "default_kmax")]
    pub kmax: u32,
    /// Jump-term convention of the variance legs.
    #[serde(default)]
    pub jump_term: JumpTerm,
}

impl ModelParams {
    /// Checks every invariant of the parameter set.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Params(msg));
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return bad(alloc::format!(
                "lambda must be positive and finite, got {}",
                self.lambda
            ));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return bad(alloc::format!(
                "horizon must be positive and finite, got {}",
                self.horizon
            ));
        }
        if !self.rate.is_finite() {
            return bad("rate must be finite".into());
        }
        for (i, a) in self.assets.iter().enumerate() {
            if !(a.sigma0_sq >= 0.0 && a.sigma0_sq.is_finite()) {
                return bad(alloc::format!(
                    "asset {}: sigma0_sq must be >= 0, got {}",
                    i + 1,
                    a.sigma0_sq
                ));
            }
            if !a.mu.is_finite() || !a.rho.is_finite() {
                return bad(alloc::format!("asset {}: mu and rho must be finite", i + 1));
            }
        }
        let g = &self.gamma;
        for i in 0..3 {
            if (g[i][i] - 1.0).abs() > 1e-12 {
                return bad(alloc::format!("gamma[{i}][{i}] = {} must be 1", g[i][i]));
            }
            for j in 0..3 {
                if !g[i][j].is_finite() || (g[i][j] - g[j][i]).abs() > 1e-12 {
                    return bad("gamma must be finite and symmetric".into());
                }
            }
        }
        let min_eig = symmetric_eigenvalues(g)[0];
        if min_eig < -1e-10 {
            return bad(alloc::format!(
                "gamma is not positive semidefinite (eigenvalue {min_eig})"
            ));
        }
        self.triple.validate()?;
        if self.kmax < 1 {
            return bad("kmax must be at least 1".into());
        }
        match self.beta {
            BetaBounds::TenDeviation => {}
            BetaBounds::MomentMatched { multiplier } => {
                if !(multiplier > 0.5 && multiplier.is_finite()) {
                    return bad(alloc::format!(
                        "beta multiplier must exceed 1/2, got {multiplier}"
                    ));
                }
            }
            BetaBounds::Fixed { b12, b23, b31 } => {
                for (pair, b) in [(Pair::P12, b12), (Pair::P23, b23), (Pair::P31, b31)] {
                    let (i, j) = pair.indices();
                    let need = self.assets[i].sigma0_sq.max(self.assets[j].sigma0_sq);
                    if !(b > 0.0 && b.is_finite()) || b * b < need {
                        return bad(alloc::format!(
                            "beta for pair {:?} must satisfy beta^2 >= {need}, got {b}",
                            pair
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    /// Non-fatal remarks about the parameter set.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (i, a) in self.assets.iter().enumerate() {
            if a.rho > 0.0 {
                out.push(alloc::format!(
                    "asset {}: positive leverage rho = {} (jumps raise the log-price)",
                    i + 1,
                    a.rho
                ));
            }
        }
        out
    }

    /// Brownian correlation of a pair.
    pub fn gamma_of(&self, pair: Pair) -> f64 {
        let (i, j) = pair.indices();
        self.gamma[i][j]
    }

    /// Jump contribution `ρᵢρⱼλκ¹₂` to entry `(i, j)`, honouring [`JumpTerm`].
    pub fn jump_term_of(&self, i: usize, j: usize) -> f64 {
        let base = self.assets[i].rho * self.assets[j].rho * self.lambda * self.triple.z1.kappa(2);
        match self.jump_term {
            JumpTerm::PerHorizonDiagonal if i == j => base / self.horizon,
            _ => base,
        }
    }
}
