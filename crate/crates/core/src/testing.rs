//! Shared fixtures for unit tests.

use crate::coefficients::{CoefficientBounds, CoefficientSet, PhaseRanges};
use crate::fixed_point::{PicardSettings, ViolationPolicy};
use crate::interface::Problem;
use crate::special::QuadratureSpec;
use crate::vapor::{PhysicalParams, VaporFront};
use std::f64::consts::PI;

/// Constant unit coefficients, `α₀ = 0.5`, `P* = 10`, `k = 0`, Stefan
/// coefficient `m`.
pub fn constant_problem(m: f64) -> Problem {
    let alpha0: f64 = 0.5;
    let params = PhysicalParams {
        p: 10.0 * PI.sqrt() * (alpha0 * alpha0).exp(),
        a: 1.0,
        lambda_b: 1.0,
        l_b: 1.0,
        gamma_b: 1.0,
        theta_ion: 11.0,
        theta_b: 10.0,
        theta_m: 1.0,
        l_m: m / 2.0,
        gamma_m: 1.0,
        k: 0.0,
    };
    Problem {
        params,
        front: VaporFront::prescribed(alpha0),
        set: CoefficientSet::uniform(1.0, 1.0, 0.0, 1.0),
        bounds: CoefficientBounds::for_constants(1.0, 1.0, 0.0, 1.0),
        ranges: PhaseRanges::physical(1.0, 10.0),
        picard: PicardSettings {
            grid_size: 129,
            ..Default::default()
        },
        quadrature: QuadratureSpec::default(),
        policy: ViolationPolicy::Abort,
    }
}


/// Constant problem with `M = 1` plus a Joule source in the liquid
/// (`C = 0.1`) and a mildly affine liquid conductivity.
pub fn joule_problem() -> Problem {
    use crate::coefficients::{estimate_bounds, CoefficientFamily};
    let mut pr = constant_problem(1.0);
    pr.params.k = (1.6f64).sqrt() * PI;
    pr.set = CoefficientSet::uniform(1.0, 1.0, 1.0, 1.0);
    pr.set.liquid.lambda = CoefficientFamily::Affine {
        intercept: 0.99,
        slope: 0.01,
    };
    pr.set.solid.rho = CoefficientFamily::Constant(0.0);
    pr.bounds = estimate_bounds(&pr.set, &pr.ranges, pr.params.a, 64, 1.0).unwrap();
    pr
}
