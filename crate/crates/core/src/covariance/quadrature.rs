//! Adaptive Simpson quadrature.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float as _;

use crate::{Error, Result};

/// Result of an adaptive quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    /// Integral estimate.
    pub value: f64,
    /// Accumulated local error estimate.
    pub error: f64,
    /// Number of integrand evaluations.
    pub evaluations: usize,
}

const MAX_DEPTH: u32 = 48;
const INITIAL_PANELS: usize = 16;
const MAX_EVALUATIONS: usize = 200_000;

struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

/// Adaptive composite Simpson rule on `[a, b]` with absolute tolerance `tol`.
///
/// The interval is first cut into 16 equal panels so that features much
/// narrower than `b − a` are not stepped over; each panel is then bisected
/// until `|S₂ − S₁| ≤ 15·tol_local`, and the Richardson-corrected value
/// `S₂ + (S₂ − S₁)/15` is accumulated. Panels stop splitting at depth 48
/// or after 200 000 evaluations; either way the call then fails with the
/// best value so far.
pub fn quadrature<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> Result<Quadrature> {
    if !(a.is_finite() && b.is_finite() && a <= b) {
        return Err(Error::Argument(alloc::format!(
            "invalid interval [{a}, {b}]"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::Argument(alloc::format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    if a == b {
        return Ok(Quadrature {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        });
    }
    let mut evals = 0usize;
    let mut eval = |x: f64, evals: &mut usize| {
        *evals += 1;
        f(x)
    };
    let h = (b - a) / INITIAL_PANELS as f64;
    let mut stack: Vec<Panel> = Vec::with_capacity(2 * MAX_DEPTH as usize + INITIAL_PANELS);
    let mut left = eval(a, &mut evals);
    for k in 0..INITIAL_PANELS {
        let pa = a + h * k as f64;
        let pb = if k + 1 == INITIAL_PANELS {
            b
        } else {
            a + h * (k + 1) as f64
        };
        let fm = eval(0.5 * (pa + pb), &mut evals);
        let fb = eval(pb, &mut evals);
        stack.push(Panel {
            a: pa,
            b: pb,
            fa: left,
            fm,
            fb,
            whole: simpson(pa, pb, left, fm, fb),
            tol: tol / INITIAL_PANELS as f64,
            depth: 0,
        });
        left = fb;
    }
    let (mut value, mut error) = (0.0, 0.0);
    let mut overflow = false;
    while let Some(p) = stack.pop() {
        let m = 0.5 * (p.a + p.b);
        let lm = eval(0.5 * (p.a + m), &mut evals);
        let rm = eval(0.5 * (m + p.b), &mut evals);
        let left = simpson(p.a, m, p.fa, lm, p.fm);
        let right = simpson(m, p.b, p.fm, rm, p.fb);
        let delta = left + right - p.whole;
        if !delta.is_finite() {
            return Err(Error::Numerical {
                message: alloc::format!("non-finite integrand near t = {m}"),
                value: f64::NAN,
                achieved: f64::INFINITY,
            });
        }
        let exhausted = p.depth >= MAX_DEPTH || evals >= MAX_EVALUATIONS;
        if delta.abs() <= 15.0 * p.tol || exhausted {
            if exhausted && delta.abs() > 15.0 * p.tol {
                overflow = true;
            }
            value += left + right + delta / 15.0;
            error += delta.abs() / 15.0;
            continue;
        }
        let half = 0.5 * p.tol;
        stack.push(Panel {
            a: p.a,
            b: m,
            fa: p.fa,
            fm: lm,
            fb: p.fm,
            whole: left,
            tol: half,
            depth: p.depth + 1,
        });
        stack.push(Panel {
            a: m,
            b: p.b,
            fa: p.fm,
            fm: rm,
            fb: p.fb,
            whole: right,
            tol: half,
            depth: p.depth + 1,
        });
    }
    if overflow {
        return Err(Error::Numerical {
            message: alloc::format!(
                "adaptive Simpson did not converge within depth {MAX_DEPTH} and {MAX_EVALUATIONS} evaluations"
            ),
            value,
            achieved: error,
        });
    }
    Ok(Quadrature {
        value,
        error,
        evaluations: evals,
    })
}
