//! Binomial-series route for `E[σᵢσⱼ]_t`.
//!
//! With `X = σᵢ²σⱼ²` and a centre `β⁴`,
//! `√X = β²·Σ_k c_k·(X/β⁴ − 1)^k` where `c_k = C(1/2, k)`, and
//! `E[(X/β⁴ − 1)^k] = Σ_p C(k,p)·(−1)^{k−p}·E[X^p]/β^{4p}`.
//! The power moments `E[X^p]` come from expanding `X^p` as a polynomial
//! in the independent decayed integrals `(Ỹ¹, Ỹ*, Ỹ**)`, where
//! `Ỹ = ∫₀^{λt} e^{s−λt} dZ_s` and each variance is
//! `e^{−λt}σ₀² + l·Ỹ` with nonnegative loadings `l`. Every coefficient of
//! the expansion is nonnegative, so no cancellation occurs even when one
//! initial variance is far below the other.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float as _;

use super::params::{BetaBounds, ModelParams, Pair};
use super::variance_affine;
use crate::moments::{Frame, ShiftedExpIntegral};
use crate::{binomial, Error, Result};

/// Coefficients `c_k = C(1/2, k)` for `k = 0..=kmax`, by the recurrence
/// `c₀ = 1`, `c_k = c_{k−1}·(3/2 − k)/k`.
pub fn sqrt_coefficients(kmax: u32) -> Vec<f64> {
    let mut c = Vec::with_capacity(kmax as usize + 1);
    c.push(1.0);
    for k in 1..=kmax {
        let kf = f64::from(k);
        let prev = c[k as usize - 1];
        c.push(prev * (1.5 - kf) / kf);
    }
    c
}

/// `E[(σᵢ²σⱼ²)^p]_t` for `p = 0..=pmax`.
pub fn product_power_moments(
    params: &ModelParams,
    pair: Pair,
    t: f64,
    pmax: u32,
) -> Result<Vec<f64>> {
    scaled_power_moments(params, pair, t, pmax, 1.0)
}

// E[(X/scale)^p] with X written in Ỹ/√scale, so a tiny X neither underflows nor overflows
fn scaled_power_moments(
    params: &ModelParams,
    pair: Pair,
    t: f64,
    pmax: u32,
    scale: f64,
) -> Result<Vec<f64>> {
    let tr = &params.triple;
    let (i, j) = pair.indices();
    let (ci, li) = variance_affine(params, i, t);
    let (cj, lj) = variance_affine(params, j, t);
    let laws = [&tr.z1, &tr.z_star, &tr.z_star_star];
    let pm = pmax as usize;
    // Ỹ¹ appears in both factors, Ỹ* and Ỹ** in at most one
    let dims = [2 * pm + 1, pm + 1, pm + 1];
    let mut mom: [Vec<f64>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    let unit = scale.sqrt();
    for k in 0..3 {
        mom[k] = ShiftedExpIntegral::new(
            0.0,
            laws[k],
            params.lambda,
            t,
            dims[k] as u32 - 1,
            Frame::Decayed,
        )?
        .raw_moments();
        for (p, m) in mom[k].iter_mut().enumerate() {
            for _ in 0..p {
                *m /= unit;
            }
        }
    }

    // X = Σ coef·Ỹ^e over at most 10 monomials
    let mut x_terms: Vec<([usize; 3], f64)> = Vec::with_capacity(10);
    x_terms.push(([0; 3], ci * cj));
    for k in 0..3 {
        let mut e = [0; 3];
        e[k] = 1;
        x_terms.push((e, ci * lj[k] + cj * li[k]));
        for m in k..3 {
            let mut e2 = e;
            e2[m] += 1;
            let coef = if k == m {
                li[k] * lj[k]
            } else {
                li[k] * lj[m] + li[m] * lj[k]
            };
            x_terms.push((e2, coef));
        }
    }
    for (e, coef) in &mut x_terms {
        *coef = match e[0] + e[1] + e[2] {
            0 => *coef / scale,
            1 => *coef / unit,
            _ => *coef,
        };
    }
    x_terms.retain(|(_, c)| *c != 0.0);

    let idx = |e: [usize; 3]| (e[0] * dims[1] + e[1]) * dims[2] + e[2];
    let size = dims[0] * dims[1] * dims[2];
    let mut poly = vec![0.0; size];
    poly[0] = 1.0;
    let mut degree = [0usize; 3];
    let mut out = vec![0.0; pm + 1];
    out[0] = 1.0;
    for p in 1..=pm {
        let mut next = vec![0.0; size];
        let mut next_degree = degree;
        for (e, _) in &x_terms {
            for k in 0..3 {
                next_degree[k] = next_degree[k].max(degree[k] + e[k]);
            }
        }
        if next_degree.iter().zip(dims.iter()).any(|(d, n)| d >= n) {
            return Err(Error::Numerical {
                message: alloc::format!(
                    "power-moment expansion exceeded its degree bounds at p = {p}"
                ),
                value: f64::NAN,
                achieved: f64::NAN,
            });
        }
        for a in 0..=degree[0] {
            for b in 0..=degree[1] {
                for c in 0..=degree[2] {
                    let v = poly[idx([a, b, c])];
                    if v == 0.0 {
                        continue;
                    }
                    for (e, coef) in &x_terms {
                        next[idx([a + e[0], b + e[1], c + e[2]])] += v * coef;
                    }
                }
            }
        }
        poly = next;
        degree = next_degree;
        let mut acc = 0.0;
        for a in 0..=degree[0] {
            for b in 0..=degree[1] {
                for c in 0..=degree[2] {
                    acc += poly[idx([a, b, c])] * mom[0][a] * mom[1][b] * mom[2][c];
                }
            }
        }
        out[p] = acc;
    }
    Ok(out)
}

/// One evaluation of the truncated series at time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesPoint {
    /// Truncated series value, an estimate of `E[σᵢσⱼ]_t`.
    pub value: f64,
    /// Last retained term `β²·c_K·E[x^K]`.
    pub last_term: f64,
    /// Expansion centre `β⁴` used at this `t`.
    pub centre: f64,
}

/// Truncated series for `E[√X]` given `E[X^p]`, `p = 0..=kmax`, around `centre`.
pub fn sqrt_series(power_moments: &[f64], centre: f64, kmax: u32) -> SeriesPoint {
    if !(centre > 0.0) {
        return SeriesPoint {
            value: 0.0,
            last_term: 0.0,
            centre,
        };
    }
    let c = sqrt_coefficients(kmax);
    let normalized: Vec<f64> = power_moments
        .iter()
        .enumerate()
        .map(|(p, m)| m / centre.powi(p as i32))
        .collect();
    let scale = centre.sqrt();
    let (mut value, mut last) = (0.0, 0.0);
    for k in 0..=kmax {
        let mut ex = 0.0;
        for p in 0..=k {
            let sign = if (k - p) % 2 == 0 { 1.0 } else { -1.0 };
            ex += binomial(k, p) * sign * normalized[p as usize];
        }
        last = scale * c[k as usize] * ex;
        value += last;
    }
    SeriesPoint {
        value,
        last_term: last,
        centre,
    }
}

/// Series estimate of `E[σᵢσⱼ]_t`.
pub fn series_point(params: &ModelParams, pair: Pair, t: f64) -> Result<SeriesPoint> {
    let kmax = params.kmax;
    let fixed = |beta: BetaBounds| -> f64 {
        let b = match beta {
            BetaBounds::Fixed { b12, b23, b31 } => match pair {
                Pair::P12 => b12,
                Pair::P23 => b23,
                Pair::P31 => b31,
            },
            _ => f64::NAN,
        };
        b.powi(4)
    };
    let centre = match params.beta {
        BetaBounds::MomentMatched { multiplier } => {
            multiplier * scaled_power_moments(params, pair, t, 1, 1.0)?[1]
        }
        BetaBounds::TenDeviation => fixed(BetaBounds::ten_deviation_bounds(params)),
        b @ BetaBounds::Fixed { .. } => fixed(b),
    };
    if !(centre > 0.0) {
        return Ok(SeriesPoint {
            value: 0.0,
            last_term: 0.0,
            centre,
        });
    }
    let normalized = scaled_power_moments(params, pair, t, kmax, centre)?;
    let unit = sqrt_series(&normalized, 1.0, kmax);
    let root = centre.sqrt();
    Ok(SeriesPoint {
        value: root * unit.value,
        last_term: root * unit.last_term,
        centre,
    })
}
