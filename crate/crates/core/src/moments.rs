//! Moments of exponential Lévy integrals.
//!
//! For a subordinator `V` with cumulants `κₙ`, the integral
//! `Y = ∫₀^{λt} eˢ dV_s` has cumulants `κₙ(e^{nλt} − 1)/n`, and raw moments
//! follow from the cumulant recursion
//! `mₙ = Σ_{j=1..n} C(n−1, j−1)·κⱼ·m_{n−j}` (complete Bell polynomials).
//! `B = α + Y` is handled by shifting the first cumulant.
//!
//! The variance processes of the model are `σ²_t = e^{−λt}(σ²₀ + Y)`, so the
//! covariance routes work with the *decayed* variable `e^{−λt}Y` whose
//! cumulants `κₙ(1 − e^{−nλt})/n` stay bounded for long horizons.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float as _;

use crate::covariance::{ModelParams, Pair};
use crate::levy::Cumulants;
use crate::{binomial, Error, Result};

fn check_time(lambda: f64, t: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Argument(alloc::format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Argument(alloc::format!(
            "t must be nonnegative, got {t}"
        )));
    }
    Ok(())
}

fn check_order(n: u32) -> Result<()> {
    if !(1..=4).contains(&n) {
        return Err(Error::Argument(alloc::format!(
            "moment order {n} not in 1..=4"
        )));
    }
    Ok(())
}

/// Raw moments `m₀..m_N` from cumulants `κ₁..κ_N` (`kappa[0]` is `κ₁`).
pub fn raw_moments_from_cumulants(kappa: &[f64]) -> Vec<f64> {
    let n_max = kappa.len();
    let mut m = vec![0.0; n_max + 1];
    m[0] = 1.0;
    for n in 1..=n_max {
        let mut acc = 0.0;
        for j in 1..=n {
            acc += binomial((n - 1) as u32, (j - 1) as u32) * kappa[j - 1] * m[n - j];
        }
        m[n] = acc;
    }
    m
}

/// Which normalization of the exponential integral to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frame {
    /// `α + ∫₀^{λt} eˢ dV_s`.
    Growing,
    /// `e^{−λt}(α + ∫₀^{λt} eˢ dV_s)`.
    Decayed,
}

/// Law of a shifted exponential integral, held as its cumulants.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftedExpIntegral {
    kappa: Vec<f64>,
}

impl ShiftedExpIntegral {
    /// Cumulants up to `order` of `α + ∫₀^{λt} eˢ dV_s` (or its decayed form).
    pub fn new<C: Cumulants + ?Sized>(
        alpha: f64,
        law: &C,
        lambda: f64,
        t: f64,
        order: u32,
        frame: Frame,
    ) -> Result<Self> {
        check_time(lambda, t)?;
        let lt = lambda * t;
        let mut kappa = Vec::with_capacity(order as usize);
        for n in 1..=order {
            let nf = f64::from(n);
            let w = match frame {
                Frame::Growing => (nf * lt).exp_m1() / nf,
                Frame::Decayed => -(-nf * lt).exp_m1() / nf,
            };
            kappa.push(law.kappa(n) * w);
        }
        if let Some(k1) = kappa.first_mut() {
            *k1 += match frame {
                Frame::Growing => alpha,
                Frame::Decayed => alpha * (-lt).exp(),
            };
        }
        Ok(ShiftedExpIntegral { kappa })
    }

    /// Cumulants `κ₁..κ_N`.
    pub fn cumulants(&self) -> &[f64] {
        &self.kappa
    }

    /// Raw moments `E[B⁰]..E[B^N]`.
    pub fn raw_moments(&self) -> Vec<f64> {
        raw_moments_from_cumulants(&self.kappa)
    }
}

/// Cached cumulants of `Y = ∫₀^{λt} eˢ dV_s` up to order 4.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpIntegralMoments {
    /// Mean-reversion rate per day.
    pub lambda: f64,
    /// Time in days.
    pub t: f64,
    cumulants: [f64; 4],
}

impl ExpIntegralMoments {
    /// Builds the cache for a driving law.
    pub fn new<C: Cumulants + ?Sized>(law: &C, lambda: f64, t: f64) -> Result<Self> {
        let s = ShiftedExpIntegral::new(0.0, law, lambda, t, 4, Frame::Growing)?;
        let mut cumulants = [0.0; 4];
        cumulants.copy_from_slice(s.cumulants());
        Ok(ExpIntegralMoments {
            lambda,
            t,
            cumulants,
        })
    }

    /// Cumulant of `Y` of order `n` in `1..=4`.
    pub fn cumulant(&self, n: u32) -> Result<f64> {
        check_order(n)?;
        Ok(self.cumulants[n as usize - 1])
    }

    /// Raw moment `E[Yⁿ]`, `n` in `1..=4`.
    pub fn moment(&self, n: u32) -> Result<f64> {
        check_order(n)?;
        Ok(raw_moments_from_cumulants(&self.cumulants[..n as usize])[n as usize])
    }
}

/// `E[Yⁿ]` for `Y = ∫₀^{λt} eˢ dV_s`, `n` in `1..=4`.
pub fn moment_y<C: Cumulants + ?Sized>(law: &C, lambda: f64, t: f64, n: u32) -> Result<f64> {
    check_order(n)?;
    ExpIntegralMoments::new(law, lambda, t)?.moment(n)
}

/// `E[(α + Y)^k]`, `k` in `1..=4`, by binomial shift of the moments of `Y`.
pub fn moment_b<C: Cumulants + ?Sized>(
    alpha1: f64,
    law: &C,
    lambda: f64,
    t: f64,
    k: u32,
) -> Result<f64> {
    check_order(k)?;
    let cache = ExpIntegralMoments::new(law, lambda, t)?;
    let m = raw_moments_from_cumulants(&cache.cumulants[..k as usize]);
    Ok((0..=k)
        .map(|j| binomial(k, j) * alpha1.powi((k - j) as i32) * m[j as usize])
        .sum())
}

/// `E[(α + Y)^k]` for any order `k ≥ 0`.
pub fn moment_b_any<C: Cumulants + ?Sized>(
    alpha1: f64,
    law: &C,
    lambda: f64,
    t: f64,
    k: u32,
) -> Result<f64> {
    if k == 0 {
        check_time(lambda, t)?;
        return Ok(1.0);
    }
    let s = ShiftedExpIntegral::new(alpha1, law, lambda, t, k, Frame::Growing)?;
    Ok(s.raw_moments()[k as usize])
}

/// Product of the two moment legs for pairs `(1,2)` and `(3,1)`:
/// `E[(σ₁,₀² + Y¹)^{p+u}]·E[((σⱼ,₀² − rⱼσ₁,₀²)/√(1−rⱼ²) + Yʲ)^{p−u}]`,
/// where `Y¹` integrates `Z¹` and `Yʲ` integrates the idiosyncratic driver
/// (`Z*` for asset 2, `Z**` for asset 3).
pub fn n_term_pair(p: u32, u: u32, t: f64, params: &ModelParams, pair: Pair) -> Result<f64> {
    if u > p {
        return Err(Error::Argument(alloc::format!(
            "n_term_pair needs u <= p (u = {u}, p = {p})"
        )));
    }
    let tr = &params.triple;
    let (j, r, s, idio) = match pair {
        Pair::P12 => (1, tr.r2, tr.s2(), &tr.z_star),
        Pair::P31 => (2, tr.r3, tr.s3(), &tr.z_star_star),
        Pair::P23 => {
            return Err(Error::Argument(
                "n_term_pair is defined for pairs (1,2) and (3,1)".into(),
            ));
        }
    };
    let v1 = params.assets[0].sigma0_sq;
    let vj = params.assets[j].sigma0_sq;
    let leg2_order = p - u;
    let leg2 = if leg2_order == 0 {
        1.0
    } else {
        if !(s > 0.0) {
            return Err(Error::Singular(alloc::format!(
                "loading r = {r} makes sqrt(1 - r^2) vanish"
            )));
        }
        moment_b_any((vj - r * v1) / s, idio, params.lambda, t, leg2_order)?
    };
    Ok(moment_b_any(v1, &tr.z1, params.lambda, t, p + u)? * leg2)
}

/// The three-leg moment product for pair `(2,3)`:
/// `r₂^{u+v}·E[(σ₂,₀²/r₂ + Y¹)^{u+v}]·E[(c/√(1−r₃²) + Y**)^{p−u+w}]·E[(Y*)^{p−v−w}]`
/// with `c = σ₃,₀² − (r₃/r₂)σ₂,₀²`.
///
/// Only nonnegativity of the three exponents is required.
pub fn n_term_23(p: u32, u: u32, v: u32, w: u32, t: f64, params: &ModelParams) -> Result<f64> {
    let e1 = u + v;
    let e2 = i64::from(p) - i64::from(u) + i64::from(w);
    let e3 = i64::from(p) - i64::from(v) - i64::from(w);
    if e2 < 0 || e3 < 0 {
        return Err(Error::Argument(alloc::format!(
            "n_term_23 exponents must be nonnegative (p={p}, u={u}, v={v}, w={w})"
        )));
    }
    let tr = &params.triple;
    if !(tr.r2 > 0.0) {
        return Err(Error::Singular("pair (2,3) divides by r2 = 0".into()));
    }
    let s3 = tr.s3();
    if !(s3 > 0.0) {
        return Err(Error::Singular(
            "pair (2,3) divides by sqrt(1 - r3^2) = 0".into(),
        ));
    }
    let v2 = params.assets[1].sigma0_sq;
    let v3 = params.assets[2].sigma0_sq;
    let c = v3 - tr.r3 / tr.r2 * v2;
    let lam = params.lambda;
    let f = tr.r2.powi(e1 as i32) * moment_b_any(v2 / tr.r2, &tr.z1, lam, t, e1)?;
    let g = moment_b_any(c / s3, &tr.z_star_star, lam, t, e2 as u32)?;
    let h = moment_b_any(0.0, &tr.z_star, lam, t, e3 as u32)?;
    Ok(f * g * h)
}
