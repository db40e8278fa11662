//! Lévy subordinators driving the variance processes.
//!
//! Three families are supported, each parametrized per unit time:
//!
//! * `Gamma { a, b }`: shape `a`, rate `b`. `κ(θ) = a·ln(b/(b−θ))` for
//!   `θ < b`, cumulants `κₙ = a·(n−1)!/bⁿ`. `Z_t ~ Gamma(a·t, rate b)`.
//! * `InverseGaussian { a, b }`: the BNS `IG(a, b)` law with mean `a/b` and
//!   variance `a/b³`. `κ(θ) = a·(b − √(b² − 2θ))` for `θ ≤ b²/2`, cumulants
//!   `κₙ = (2n−3)!!·a/b^{2n−1}`. `Z_t` is inverse Gaussian with mean `a·t/b`
//!   and shape `(a·t)²`.
//! * `Zero`: the null process.
//!
//! A [`CorrelatedTriple`] builds the subordinators of assets 2 and 3 from
//! three independent ones:
//! `dZ² = r₂·dZ¹ + √(1−r₂²)·dZ*` and `dZ³ = r₃·dZ¹ + √(1−r₃²)·dZ**`.

#[allow(unused_imports)]
use num_traits::Float as _;
use rand::Rng;
use rand_distr::{Distribution, Gamma, InverseGaussian};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A Lévy subordinator law, parametrized per unit time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpecRepr", into = "SpecRepr")]
pub enum SubordinatorSpec {
    /// Gamma process with shape `a` and rate `b`.
    Gamma {
        /// Shape per unit time.
        a: f64,
        /// Rate.
        b: f64,
    },
    /// Inverse-Gaussian process `IG(a, b)`.
    InverseGaussian {
        /// Scale per unit time.
        a: f64,
        /// Tilt.
        b: f64,
    },
    /// The null process.
    Zero,
}

impl Default for SubordinatorSpec {
    fn default() -> Self {
        SubordinatorSpec::Gamma { a: 1.0, b: 1.0 }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Family {
    Gamma,
    Ig,
    Zero,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecRepr {
    family: Family,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    b: Option<f64>,
}

impl TryFrom<SpecRepr> for SubordinatorSpec {
    type Error = Error;

    fn try_from(r: SpecRepr) -> Result<Self> {
        let need = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| {
                Error::Params(alloc::format!("subordinator field `{name}` is required"))
            })
        };
        match r.family {
            Family::Gamma => SubordinatorSpec::gamma(need(r.a, "a")?, need(r.b, "b")?),
            Family::Ig => SubordinatorSpec::inverse_gaussian(need(r.a, "a")?, need(r.b, "b")?),
            Family::Zero => Ok(SubordinatorSpec::Zero),
        }
    }
}

impl From<SubordinatorSpec> for SpecRepr {
    fn from(s: SubordinatorSpec) -> Self {
        match s {
            SubordinatorSpec::Gamma { a, b } => SpecRepr {
                family: Family::Gamma,
                a: Some(a),
                b: Some(b),
            },
            SubordinatorSpec::InverseGaussian { a, b } => SpecRepr {
                family: Family::Ig,
                a: Some(a),
                b: Some(b),
            },
            SubordinatorSpec::Zero => SpecRepr {
                family: Family::Zero,
                a: None,
                b: None,
            },
        }
    }
}

fn check_positive(a: f64, b: f64) -> Result<()> {
    if !(a > 0.0 && a.is_finite() && b > 0.0 && b.is_finite()) {
        return Err(Error::Params(alloc::format!(
            "subordinator parameters must be positive and finite (a = {a}, b = {b})"
        )));
    }
    Ok(())
}

/// Anything with a sequence of cumulants `κₙ`, `n ≥ 1`.
pub trait Cumulants {
    /// The `n`th cumulant of the unit-time law; `n ≥ 1`.
    fn kappa(&self, n: u32) -> f64;
}

impl SubordinatorSpec {
    /// Gamma law with shape `a` and rate `b`.
    pub fn gamma(a: f64, b: f64) -> Result<Self> {
        check_positive(a, b)?;
        Ok(SubordinatorSpec::Gamma { a, b })
    }

    /// Inverse-Gaussian law `IG(a, b)`.
    pub fn inverse_gaussian(a: f64, b: f64) -> Result<Self> {
        check_positive(a, b)?;
        Ok(SubordinatorSpec::InverseGaussian { a, b })
    }

    /// Re-checks parameter positivity (useful after manual construction).
    pub fn validate(&self) -> Result<()> {
        match *self {
            SubordinatorSpec::Gamma { a, b } | SubordinatorSpec::InverseGaussian { a, b } => {
                check_positive(a, b)
            }
            SubordinatorSpec::Zero => Ok(()),
        }
    }

    /// Cumulant of any order `n ≥ 1` (order 0 returns 0).
    pub fn cumulant_of_order(&self, n: u32) -> f64 {
        if n == 0 {
            return 0.0;
        }
        match *self {
            SubordinatorSpec::Gamma { a, b } => {
                let mut fact = 1.0;
                for i in 1..n {
                    fact *= f64::from(i);
                }
                a * fact / b.powi(n as i32)
            }
            SubordinatorSpec::InverseGaussian { a, b } => {
                // (2n-3)!! with (-1)!! = 1
                let mut dfact = 1.0;
                let mut m = 2 * i64::from(n) - 3;
                while m > 1 {
                    dfact *= m as f64;
                    m -= 2;
                }
                a * dfact / b.powi(2 * n as i32 - 1)
            }
            SubordinatorSpec::Zero => 0.0,
        }
    }

    /// Cumulant `κₙ` for `n` in `1..=4`.
    pub fn cumulant(&self, n: u32) -> Result<f64> {
        if !(1..=4).contains(&n) {
            return Err(Error::Argument(alloc::format!(
                "cumulant order {n} not in 1..=4"
            )));
        }
        Ok(self.cumulant_of_order(n))
    }

    /// Supremum of the set where the CGF is finite.
    pub fn cgf_bound(&self) -> f64 {
        match *self {
            SubordinatorSpec::Gamma { b, .. } => b,
            SubordinatorSpec::InverseGaussian { b, .. } => 0.5 * b * b,
            SubordinatorSpec::Zero => f64::INFINITY,
        }
    }

    /// Cumulant generating function `κ(θ) = ln E[exp(θZ₁)]`.
    pub fn cgf(&self, theta: f64) -> Result<f64> {
        let bound = self.cgf_bound();
        match *self {
            SubordinatorSpec::Gamma { a, b } => {
                if !(theta < b) {
                    return Err(Error::Domain { theta, bound });
                }
                Ok(-a * (-theta / b).ln_1p())
            }
            SubordinatorSpec::InverseGaussian { a, b } => {
                if !(theta <= bound) {
                    return Err(Error::Domain { theta, bound });
                }
                // b − √(b² − 2θ) written without cancellation
                let root = (b * b - 2.0 * theta).sqrt();
                Ok(a * 2.0 * theta / (b + root))
            }
            SubordinatorSpec::Zero => Ok(0.0),
        }
    }

    /// A reusable sampler for increments over a step of length `dt`.
    pub fn sampler(&self, dt: f64) -> Result<IncrementSampler> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Argument(alloc::format!(
                "time step must be positive, got {dt}"
            )));
        }
        Ok(match *self {
            SubordinatorSpec::Gamma { a, b } => IncrementSampler::Gamma(
                Gamma::new(a * dt, 1.0 / b).map_err(|e| Error::Params(alloc::format!("{e}")))?,
            ),
            SubordinatorSpec::InverseGaussian { a, b } => {
                let at = a * dt;
                IncrementSampler::InverseGaussian(
                    InverseGaussian::new(at / b, at * at)
                        .map_err(|e| Error::Params(alloc::format!("{e}")))?,
                )
            }
            SubordinatorSpec::Zero => IncrementSampler::Zero,
        })
    }

    /// One draw of `Z_dt`.
    pub fn sample_increment<R: Rng + ?Sized>(&self, dt: f64, rng: &mut R) -> Result<f64> {
        Ok(self.sampler(dt)?.sample(rng))
    }
}

impl Cumulants for SubordinatorSpec {
    fn kappa(&self, n: u32) -> f64 {
        self.cumulant_of_order(n)
    }
}

/// Prebuilt increment distribution for a fixed step length.
#[derive(Debug, Clone, Copy)]
pub enum IncrementSampler {
    /// Gamma increments.
    Gamma(Gamma<f64>),
    /// Inverse-Gaussian increments.
    InverseGaussian(InverseGaussian<f64>),
    /// Always zero.
    Zero,
}

impl Distribution<f64> for IncrementSampler {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            IncrementSampler::Gamma(g) => g.sample(rng),
            IncrementSampler::InverseGaussian(ig) => ig.sample(rng),
            IncrementSampler::Zero => 0.0,
        }
    }
}

/// `κₙ` of a unit-time law; `n` in `1..=4`.
pub fn cumulant(spec: &SubordinatorSpec, n: u32) -> Result<f64> {
    spec.cumulant(n)
}

/// `κ(θ)` of a unit-time law.
pub fn cgf(spec: &SubordinatorSpec, theta: f64) -> Result<f64> {
    spec.cgf(theta)
}

/// One increment `Z_dt`.
pub fn sample_increment<R: Rng + ?Sized>(
    spec: &SubordinatorSpec,
    dt: f64,
    rng: &mut R,
) -> Result<f64> {
    spec.sample_increment(dt, rng)
}

/// Three independent subordinators `Z¹, Z*, Z**` and the loadings that
/// correlate assets 2 and 3 with asset 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelatedTriple {
    /// Loading of `Z²` on `Z¹`.
    pub r2: f64,
    /// Loading of `Z³` on `Z¹`.
    pub r3: f64,
    /// Driver of asset 1 and the common factor.
    pub z1: SubordinatorSpec,
    /// Idiosyncratic driver of asset 2.
    pub z_star: SubordinatorSpec,
    /// Idiosyncratic driver of asset 3.
    pub z_star_star: SubordinatorSpec,
}

impl CorrelatedTriple {
    /// Checks `0 ≤ r₂, r₃ ≤ 1` and the component laws.
    pub fn validate(&self) -> Result<()> {
        for (name, r) in [("r2", self.r2), ("r3", self.r3)] {
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::Params(alloc::format!(
                    "{name} = {r} must lie in [0, 1]"
                )));
            }
        }
        self.z1.validate()?;
        self.z_star.validate()?;
        self.z_star_star.validate()
    }

    /// `√(1−r₂²)`.
    pub fn s2(&self) -> f64 {
        (1.0 - self.r2 * self.r2).max(0.0).sqrt()
    }

    /// `√(1−r₃²)`.
    pub fn s3(&self) -> f64 {
        (1.0 - self.r3 * self.r3).max(0.0).sqrt()
    }

    /// `(dZ², dZ³)` from independent increments of `Z¹, Z*, Z**`.
    pub fn correlated_increments(&self, dz1: f64, dz_star: f64, dz_star_star: f64) -> (f64, f64) {
        (
            self.r2 * dz1 + self.s2() * dz_star,
            self.r3 * dz1 + self.s3() * dz_star_star,
        )
    }

    /// The subordinator driving asset `i` (0-based).
    pub fn asset(&self, i: usize) -> AssetSubordinator<'_> {
        assert!(i < 3, "asset index {i} out of range");
        AssetSubordinator {
            triple: self,
            asset: i,
        }
    }

    /// Stationary correlations `(ρ₁₂, ρ₁₃, ρ₂₃)` of the squared volatilities.
    pub fn stationary_vol_correlations(&self) -> Result<(f64, f64, f64)> {
        let k1 = self.z1.cumulant_of_order(2);
        let k2 = self.asset(1).kappa(2);
        let k3 = self.asset(2).kappa(2);
        if !(k2 > 0.0) || !(k3 > 0.0) {
            return Err(Error::DegenerateLaw(alloc::format!(
                "derived second cumulants must be positive (asset 2: {k2}, asset 3: {k3})"
            )));
        }
        let rho12 = self.r2 * (k1 / k2).sqrt();
        let rho13 = self.r3 * (k1 / k3).sqrt();
        let rho23 = self.r2 * self.r3 * k1 / (k2 * k3).sqrt();
        Ok((rho12.min(1.0), rho13.min(1.0), rho23.min(1.0)))
    }
}

/// Inverts the stationary correlation map `ρ = r·√(κ¹₂/(r²κ¹₂ + (1−r²)κ*₂))`
/// for the loading `r`. The result is clamped to `[0, 1]`.
pub fn loading_from_stationary_correlation(rho: f64, k1: f64, k_star: f64) -> f64 {
    if !(rho > 0.0) {
        return 0.0;
    }
    if rho >= 1.0 {
        return 1.0;
    }
    let rho2 = rho * rho;
    let den = k1 * (1.0 - rho2) + rho2 * k_star;
    if !(den > 0.0) {
        return 1.0;
    }
    (rho2 * k_star / den).sqrt().clamp(0.0, 1.0)
}

/// The (possibly derived) subordinator of one asset.
#[derive(Debug, Clone, Copy)]
pub struct AssetSubordinator<'a> {
    triple: &'a CorrelatedTriple,
    asset: usize,
}

impl Cumulants for AssetSubordinator<'_> {
    fn kappa(&self, n: u32) -> f64 {
        let t = self.triple;
        let (r, s, idio) = match self.asset {
            0 => return t.z1.cumulant_of_order(n),
            1 => (t.r2, t.s2(), &t.z_star),
            _ => (t.r3, t.s3(), &t.z_star_star),
        };
        let n_i = n as i32;
        r.powi(n_i) * t.z1.cumulant_of_order(n) + s.powi(n_i) * idio.cumulant_of_order(n)
    }
}

/// A law scaled by a nonnegative constant: cumulants `cⁿκₙ`.
#[derive(Debug, Clone, Copy)]
pub struct Scaled<'a, C: Cumulants + ?Sized> {
    /// Underlying law.
    pub inner: &'a C,
    /// Scale factor.
    pub scale: f64,
}

impl<C: Cumulants + ?Sized> Cumulants for Scaled<'_, C> {
    fn kappa(&self, n: u32) -> f64 {
        self.scale.powi(n as i32) * self.inner.kappa(n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn num_derivative(spec: &SubordinatorSpec, order: u32) -> f64 {
        let h = 1e-3 * spec.cgf_bound().min(1.0);
        let f = |x: f64| spec.cgf(x).unwrap();
        match order {
            1 => (f(h) - f(-h)) / (2.0 * h),
            2 => (f(h) - 2.0 * f(0.0) + f(-h)) / (h * h),
            3 => (f(2.0 * h) - 2.0 * f(h) + 2.0 * f(-h) - f(-2.0 * h)) / (2.0 * h * h * h),
            _ => unreachable!(),
        }
    }

    #[test]
    fn gamma_cumulant_examples() {
        assert_eq!(
            SubordinatorSpec::gamma(1.0, 1.0)
                .unwrap()
                .cumulant(1)
                .unwrap(),
            1.0
        );
        let g = SubordinatorSpec::gamma(2.0, 4.0).unwrap();
        assert!((g.cumulant(2).unwrap() - 0.125).abs() < 1e-15);
        // oracle: numerical second derivative of the closed-form CGF
        assert!((num_derivative(&g, 2) - 0.125).abs() < 1e-6);
        assert_eq!(SubordinatorSpec::Zero.cumulant(3).unwrap(), 0.0);
        assert!(g.cumulant(5).is_err());
        assert!(g.cumulant(0).is_err());
    }

    #[test]
    fn inverse_gaussian_convention_pinned_by_cgf() {
        let ig = SubordinatorSpec::inverse_gaussian(1.5, 2.0).unwrap();
        for n in 1..=3 {
            let num = num_derivative(&ig, n);
            let k = ig.cumulant(n).unwrap();
            assert!(
                (num - k).abs() < 1e-5 * k.max(1.0),
                "order {n}: {num} vs {k}"
            );
        }
        // mean a/b, variance a/b^3
        assert!((ig.cumulant(1).unwrap() - 0.75).abs() < 1e-15);
        assert!((ig.cumulant(2).unwrap() - 1.5 / 8.0).abs() < 1e-15);
        assert!((ig.cumulant(4).unwrap() - 15.0 * 1.5 / 128.0).abs() < 1e-15);
    }

    #[test]
    fn cgf_examples_and_domain() {
        assert_eq!(
            SubordinatorSpec::gamma(1.0, 1.0).unwrap().cgf(0.0).unwrap(),
            0.0
        );
        let g = SubordinatorSpec::gamma(1.0, 2.0).unwrap();
        assert!((g.cgf(1.0).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert_eq!(SubordinatorSpec::Zero.cgf(5.0).unwrap(), 0.0);
        assert_eq!(
            g.cgf(2.0),
            Err(Error::Domain {
                theta: 2.0,
                bound: 2.0
            })
        );
        let ig = SubordinatorSpec::inverse_gaussian(1.0, 2.0).unwrap();
        assert!(ig.cgf(2.0).is_ok());
        assert!(ig.cgf(2.0001).is_err());
    }

    #[test]
    fn cgf_matches_sample_mgf() {
        let g = SubordinatorSpec::gamma(1.0, 2.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let s = g.sampler(1.0).unwrap();
        let n = 1_000_000;
        let (mut sum, mut sq) = (0.0, 0.0);
        for _ in 0..n {
            let e = s.sample(&mut rng).exp();
            sum += e;
            sq += e * e;
        }
        let mean = sum / n as f64;
        let se = ((sq / n as f64 - mean * mean) / n as f64).sqrt();
        // E[e^Z] = 2 exactly for Gamma(1, 2)
        assert!((mean - 2.0).abs() < 4.0 * se, "{mean} ± {se}");
        assert!((mean.ln() - g.cgf(1.0).unwrap()).abs() < 0.01);
    }

    #[test]
    fn serde_shape() {
        let g: SubordinatorSpec =
            serde_json::from_str(r#"{"family":"gamma","a":1,"b":2}"#).unwrap();
        assert_eq!(g, SubordinatorSpec::Gamma { a: 1.0, b: 2.0 });
        let ig: SubordinatorSpec = serde_json::from_str(r#"{"family":"ig","a":1,"b":2}"#).unwrap();
        assert_eq!(ig, SubordinatorSpec::InverseGaussian { a: 1.0, b: 2.0 });
        let z: SubordinatorSpec = serde_json::from_str(r#"{"family":"zero"}"#).unwrap();
        assert_eq!(serde_json::to_string(&z).unwrap(), r#"{"family":"zero"}"#);
        assert!(
            serde_json::from_str::<SubordinatorSpec>(r#"{"family":"gamma","a":-1,"b":2}"#).is_err()
        );
        assert!(serde_json::from_str::<SubordinatorSpec>(r#"{"family":"gamma","a":1}"#).is_err());
    }

    #[test]
    fn correlated_increment_examples() {
        let mut t = CorrelatedTriple {
            r2: 1.0,
            r3: 0.5,
            z1: SubordinatorSpec::default(),
            z_star: SubordinatorSpec::default(),
            z_star_star: SubordinatorSpec::default(),
        };
        assert_eq!(t.correlated_increments(2.0, 5.0, 0.0).0, 2.0);
        t.r2 = 0.0;
        assert_eq!(t.correlated_increments(2.0, 5.0, 0.0).0, 5.0);
    }

    #[test]
    fn stationary_correlation_examples() {
        let t = CorrelatedTriple {
            r2: 1.0,
            r3: 1.0,
            z1: SubordinatorSpec::default(),
            z_star: SubordinatorSpec::Zero,
            z_star_star: SubordinatorSpec::Zero,
        };
        assert_eq!(t.stationary_vol_correlations().unwrap(), (1.0, 1.0, 1.0));
        let t = CorrelatedTriple {
            r2: 0.0,
            r3: 0.5,
            z_star: SubordinatorSpec::default(),
            ..t
        };
        let (rho12, _, rho23) = t.stationary_vol_correlations().unwrap();
        assert_eq!((rho12, rho23), (0.0, 0.0));
        let t = CorrelatedTriple { r2: 0.0, ..t };
        let degenerate = CorrelatedTriple {
            z_star: SubordinatorSpec::Zero,
            ..t
        };
        assert!(matches!(
            degenerate.stationary_vol_correlations(),
            Err(Error::DegenerateLaw(_))
        ));
    }

    #[test]
    fn loading_inversion_round_trips() {
        let z1 = SubordinatorSpec::gamma(1.0, 1.0).unwrap();
        let zs = SubordinatorSpec::gamma(2.0, 0.5).unwrap();
        for &r in &[0.0, 0.1, 0.2319, 0.5721, 0.9, 1.0] {
            let t = CorrelatedTriple {
                r2: r,
                r3: r,
                z1,
                z_star: zs,
                z_star_star: zs,
            };
            let (rho12, _, _) = t.stationary_vol_correlations().unwrap();
            let back = loading_from_stationary_correlation(rho12, z1.kappa(2), zs.kappa(2));
            assert!((back - r).abs() < 1e-12, "{r} -> {rho12} -> {back}");
        }
    }
}
