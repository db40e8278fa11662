#![allow(dead_code)]

use bns_swap_core::covariance::{AssetParams, BetaBounds, JumpTerm, ModelParams};
use bns_swap_core::levy::{CorrelatedTriple, SubordinatorSpec};

pub const REF_MU: [f64; 3] = [-0.0038, 0.0317, -0.0002];
pub const REF_SIGMA0: [f64; 3] = [0.0502, 0.0267, 0.0058];
pub const REF_RHO: [f64; 3] = [0.8, 0.5, 0.6];
pub const REF_OMEGA: [[f64; 3]; 3] = [
    [0.00736, 0.00065, 0.00082],
    [0.00065, 0.00498, 0.00039],
    [0.00082, 0.00039, 0.00217],
];

pub fn reference_gamma() -> [[f64; 3]; 3] {
    [
        [1.0, -0.0216, -0.0276],
        [-0.0216, 1.0, -0.0862],
        [-0.0276, -0.0862, 1.0],
    ]
}

pub fn unit_gamma_law() -> SubordinatorSpec {
    SubordinatorSpec::Gamma { a: 1.0, b: 1.0 }
}

/// Gamma(1,1) base fixture with the worked example's remaining parameters.
pub fn base_params() -> ModelParams {
    let g = unit_gamma_law();
    ModelParams {
        assets: [0, 1, 2].map(|i| AssetParams {
            mu: REF_MU[i],
            sigma0_sq: REF_SIGMA0[i] * REF_SIGMA0[i],
            rho: REF_RHO[i],
        }),
        lambda: 0.4,
        gamma: reference_gamma(),
        triple: CorrelatedTriple {
            r2: 0.2319,
            r3: 0.5721,
            z1: g,
            z_star: g,
            z_star_star: g,
        },
        rate: 0.00014,
        horizon: 252.0,
        beta: BetaBounds::default(),
        kmax: 8,
        jump_term: JumpTerm::default(),
    }
}

/// Base fixture with every subordinator replaced by the zero law.
pub fn zero_params() -> ModelParams {
    let mut p = base_params();
    p.triple.z1 = SubordinatorSpec::Zero;
    p.triple.z_star = SubordinatorSpec::Zero;
    p.triple.z_star_star = SubordinatorSpec::Zero;
    p
}

/// `(1 − e^{−λT})/(λT)`.
pub fn decay_average(lambda: f64, horizon: f64) -> f64 {
    (1.0 - (-lambda * horizon).exp()) / (lambda * horizon)
}
