//! Self-similar solution of a two-phase spherical Stefan problem with a
//! Joule heat source and temperature-dependent thermal coefficients.
//!
//! The pipeline runs bottom-up:
//!
//! 1. [`vapor`] fixes the boiling-front coefficient `α₀` from the arc power.
//! 2. [`coefficients`] turns material laws `c(θ), γ(θ), λ(θ), ρ(θ)` into the
//!    dimensionless starred coefficients and their hypothesis constants.
//! 3. [`kernels`] evaluates the integral kernels `E, χ, Φ` along a profile.
//! 4. [`fixed_point`] iterates the liquid and solid operators to their
//!    fixed points and computes the contraction windows.
//! 5. [`interface`] solves the Stefan condition for the melt-front
//!    coefficient `ξ*`.
//! 6. [`reconstruct`] maps back to physical temperatures and checks the
//!    result against ODE residuals and an independent shooting solver.
//!
//! [`config`], [`report`] and [`pipeline`] wrap everything into the
//! config-driven `check` / `solve` / `oracle` / `sweep` commands.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coefficients;
pub mod config;
pub mod error;
pub mod estimates;
pub mod fixed_point;
pub mod interface;
pub mod kernels;
pub mod pipeline;
pub mod profile;
pub mod reconstruct;
pub mod report;
pub mod special;
pub mod vapor;

#[cfg(test)]
pub(crate) mod testing;

pub use coefficients::{CoefficientBounds, CoefficientFamily, CoefficientSet, Phase, PhaseRanges, Starred};
pub use config::RunConfig;
pub use error::{Error, Result};
pub use fixed_point::{PicardResult, PicardSettings};
pub use interface::XiSolveResult;
pub use kernels::KernelTable;
pub use profile::{Domain, SimilarityProfile};
pub use reconstruct::PhysicalSolution;
pub use report::SolveReport;
pub use special::{Limit, QuadratureSpec};
pub use vapor::{PhysicalParams, VaporFront};

/// `k²/(16a²π²)`, the prefactor carried by every Joule-source term.
pub fn joule_prefactor(k: f64, a: f64) -> f64 {
    let pi2 = std::f64::consts::PI * std::f64::consts::PI;
    k * k / (16.0 * a * a * pi2)
}
