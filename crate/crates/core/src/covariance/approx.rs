//! Second-order approximation `E[√X] ≈ √m − v/(8m^{3/2})` for
//! `X = σᵢ²σⱼ²`, with `m = E[X]` and `v = Var[X]`.
//!
//! Each variance is affine in the independent decayed integrals
//! `(Ỹ¹, Ỹ*, Ỹ**)`, so `X` is a quadratic polynomial in them and
//! `Var[X] = Σ_{m,n} a_m a_n Cov(U_m, U_n)` over its monomials `U_m`;
//! every covariance factors into products of single-integral moments up to
//! order four.

#[allow(unused_imports)]
use num_traits::Float as _;

use super::params::{ModelParams, Pair};
use super::variance_affine;
use crate::moments::{Frame, ShiftedExpIntegral};
use crate::{Error, Result};

/// Monomial `Y₁^e₀·Y₂^e₁·Y₃^e₂` with its coefficient.
#[derive(Debug, Clone, Copy)]
struct Term {
    exp: [u32; 3],
    coef: f64,
}

/// `E[σᵢ²σⱼ²]_t` and `Var[σᵢ²σⱼ²]_t`.
pub fn product_mean_and_variance(params: &ModelParams, pair: Pair, t: f64) -> Result<(f64, f64)> {
    let tr = &params.triple;
    let lam = params.lambda;
    let (i, j) = pair.indices();
    let (ci, li) = variance_affine(params, i, t);
    let (cj, lj) = variance_affine(params, j, t);

    let mut terms: [Term; 9] = [Term {
        exp: [0; 3],
        coef: 0.0,
    }; 9];
    let mut n = 0;
    for k in 0..3 {
        let mut e = [0; 3];
        e[k] = 1;
        terms[n] = Term {
            exp: e,
            coef: ci * lj[k] + cj * li[k],
        };
        n += 1;
    }
    for k in 0..3 {
        for m in k..3 {
            let mut e = [0; 3];
            e[k] += 1;
            e[m] += 1;
            let coef = if k == m {
                li[k] * lj[k]
            } else {
                li[k] * lj[m] + li[m] * lj[k]
            };
            terms[n] = Term { exp: e, coef };
            n += 1;
        }
    }

    let laws = [&tr.z1, &tr.z_star, &tr.z_star_star];
    let mut mom = [[0.0; 5]; 3];
    for (k, law) in laws.iter().enumerate() {
        let m = ShiftedExpIntegral::new(0.0, *law, lam, t, 4, Frame::Decayed)?.raw_moments();
        mom[k].copy_from_slice(&m);
    }
    let expect =
        |e: [u32; 3]| mom[0][e[0] as usize] * mom[1][e[1] as usize] * mom[2][e[2] as usize];

    let mean = ci * cj + terms.iter().map(|t| t.coef * expect(t.exp)).sum::<f64>();
    let mut var = 0.0;
    for a in &terms {
        if a.coef == 0.0 {
            continue;
        }
        for b in &terms {
            if b.coef == 0.0 {
                continue;
            }
            let joint = [
                a.exp[0] + b.exp[0],
                a.exp[1] + b.exp[1],
                a.exp[2] + b.exp[2],
            ];
            var += a.coef * b.coef * (expect(joint) - expect(a.exp) * expect(b.exp));
        }
    }
    Ok((mean, var.max(0.0)))
}

/// Approximation of `E[σᵢσⱼ]_t`.
pub fn approx_point(params: &ModelParams, pair: Pair, t: f64) -> Result<f64> {
    let (m, v) = product_mean_and_variance(params, pair, t)?;
    if m == 0.0 && v == 0.0 {
        return Ok(0.0);
    }
    if !(m > 0.0) {
        return Err(Error::Numerical {
            message: alloc::format!("E[sigma_i^2 sigma_j^2] = {m} is not positive at t = {t}"),
            value: m,
            achieved: f64::NAN,
        });
    }
    Ok(m.sqrt() - v / (8.0 * m * m.sqrt()))
}
