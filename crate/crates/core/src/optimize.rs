//! Constrained maximization of `wᵀΩw` over unit-norm weights with
//! `μᵀw = k` and `1ᵀw = 1`.
//!
//! Factor `A = [μ 1] = P·[R; 0]` with `P` orthogonal. Writing `w = P·F`,
//! the two linear constraints pin the first two coordinates of `F` to
//! `q = R^{−T}b`, and `|w| = 1` leaves the third at `±√(1 − |q|²)`. With
//! three assets the maximization is therefore a choice between two signs.

#[allow(unused_imports)]
use num_traits::Float as _;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Orthogonal basis adapted to the constraint matrix `[μ 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintBasis {
    /// `[P₁ | P₂]`, stored row-major; columns 0 and 1 span `{μ, 1}`.
    pub p: [[f64; 3]; 3],
    /// Upper-triangular factor with nonnegative diagonal.
    pub r: [[f64; 2]; 2],
    /// Expected returns.
    pub mu: [f64; 3],
    /// Right-hand side `(k, 1)`.
    pub b: [f64; 2],
}

/// Weights satisfying the constraints, with the maximized quadratic form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeasibleWeights {
    /// `R^{−T}b`.
    pub q: [f64; 2],
    /// `√(1 − |q|²)`.
    pub rmag: f64,
    /// `(q₁, q₂, ±rmag)`.
    pub f: [f64; 3],
    /// `P·F`.
    pub w: [f64; 3],
    /// `wᵀΩw`.
    pub lambda_value: f64,
    /// Quadratic form at the rejected sign.
    pub other_sign_lambda: f64,
    /// Sign of the third coordinate of `F` (`+1` or `−1`).
    pub sign: f64,
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// `M·x` for a row-major 3×3 matrix.
pub fn mat_vec(m: &[[f64; 3]; 3], x: &[f64; 3]) -> [f64; 3] {
    [dot(&m[0], x), dot(&m[1], x), dot(&m[2], x)]
}

/// `wᵀΩw`.
pub fn quadratic_form(w: &[f64; 3], omega: &[[f64; 3]; 3]) -> f64 {
    dot(w, &mat_vec(omega, w))
}

/// Range of `μᵀw` over unit-norm, fully-invested weights:
/// `mean(μ) ± |μ − mean(μ)·1|·√(2/3)`.
pub fn attainable_targets(mu: &[f64; 3]) -> (f64, f64) {
    let mean = (mu[0] + mu[1] + mu[2]) / 3.0;
    let dev = [mu[0] - mean, mu[1] - mean, mu[2] - mean];
    let half = dot(&dev, &dev).sqrt() * (2.0f64 / 3.0).sqrt();
    (mean - half, mean + half)
}

/// Gram–Schmidt factorization of `A = [μ 1]` (with one re-orthogonalization
/// pass); the third column of `P` is the cross product of the first two.
pub fn qr_constraint_basis(mu: [f64; 3], k: f64) -> Result<ConstraintBasis> {
    if !mu.iter().all(|m| m.is_finite()) || !k.is_finite() {
        return Err(Error::Argument("mu and k must be finite".into()));
    }
    let r11 = dot(&mu, &mu).sqrt();
    if !(r11 > 0.0) {
        return Err(Error::RankDeficient);
    }
    let q1 = [mu[0] / r11, mu[1] / r11, mu[2] / r11];
    let ones = [1.0; 3];
    let mut r12 = dot(&q1, &ones);
    let mut v = [1.0 - r12 * q1[0], 1.0 - r12 * q1[1], 1.0 - r12 * q1[2]];
    let c = dot(&q1, &v);
    r12 += c;
    for (vi, qi) in v.iter_mut().zip(q1.iter()) {
        *vi -= c * qi;
    }
    let r22 = dot(&v, &v).sqrt();
    if r22 <= 1e-12 * 3f64.sqrt() {
        return Err(Error::RankDeficient);
    }
    let q2 = [v[0] / r22, v[1] / r22, v[2] / r22];
    let n = cross(&q1, &q2);
    let p = [
        [q1[0], q2[0], n[0]],
        [q1[1], q2[1], n[1]],
        [q1[2], q2[2], n[2]],
    ];
    Ok(ConstraintBasis {
        p,
        r: [[r11, r12], [0.0, r22]],
        mu,
        b: [k, 1.0],
    })
}

/// Completes `F` from `q` and evaluates both signs of its third coordinate
/// against `Ω`, keeping the larger quadratic form (ties keep `+`).
pub fn weights_from_coordinates(
    p: &[[f64; 3]; 3],
    q: [f64; 2],
    rmag: f64,
    omega: &[[f64; 3]; 3],
) -> FeasibleWeights {
    let eval = |sign: f64| {
        let f = [q[0], q[1], sign * rmag];
        let w = mat_vec(p, &f);
        (f, w, quadratic_form(&w, omega))
    };
    let (fp, wp, lp) = eval(1.0);
    let (fm, wm, lm) = eval(-1.0);
    if lm > lp {
        FeasibleWeights {
            q,
            rmag,
            f: fm,
            w: wm,
            lambda_value: lm,
            other_sign_lambda: lp,
            sign: -1.0,
        }
    } else {
        FeasibleWeights {
            q,
            rmag,
            f: fp,
            w: wp,
            lambda_value: lp,
            other_sign_lambda: lm,
            sign: 1.0,
        }
    }
}

/// `q = R^{−T}b`, `rmag = √(1 − |q|²)`, and the sign of `F₃` maximizing
/// `wᵀΩw` for `w = P·F`.
pub fn feasible_weights(basis: &ConstraintBasis, omega: &[[f64; 3]; 3]) -> Result<FeasibleWeights> {
    let r = &basis.r;
    let q1 = basis.b[0] / r[0][0];
    let q2 = (basis.b[1] - r[0][1] * q1) / r[1][1];
    let norm2 = q1 * q1 + q2 * q2;
    if !(norm2 <= 1.0 + 1e-12) {
        let (lo, hi) = attainable_targets(&basis.mu);
        return Err(Error::InfeasibleTarget {
            k: basis.b[0],
            lo,
            hi,
        });
    }
    let rmag = (1.0 - norm2).max(0.0).sqrt();
    Ok(weights_from_coordinates(&basis.p, [q1, q2], rmag, omega))
}

/// Eigenvalues of a symmetric 3×3 matrix in ascending order.
pub fn symmetric_eigenvalues(m: &[[f64; 3]; 3]) -> [f64; 3] {
    let p1 = m[0][1] * m[0][1] + m[0][2] * m[0][2] + m[1][2] * m[1][2];
    if p1 == 0.0 {
        let mut d = [m[0][0], m[1][1], m[2][2]];
        d.sort_by(f64::total_cmp);
        return d;
    }
    let q = (m[0][0] + m[1][1] + m[2][2]) / 3.0;
    let p2 = (m[0][0] - q).powi(2) + (m[1][1] - q).powi(2) + (m[2][2] - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    let mut b = *m;
    for (i, row) in b.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            *x = (*x - if i == j { q } else { 0.0 }) / p;
        }
    }
    let det = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1])
        - b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0])
        + b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
    let phi = (det / 2.0).clamp(-1.0, 1.0).acos() / 3.0;
    let hi = q + 2.0 * p * phi.cos();
    let lo = q + 2.0 * p * (phi + 2.0 * core::f64::consts::PI / 3.0).cos();
    [lo, 3.0 * q - hi - lo, hi]
}
