//! The liquid operator `V`, the solid operator `W`, and plain Picard
//! iteration to their fixed points.
//!
//! Both operators return profiles carrying exact slopes
//! (`V' = −(α₀²P*·E + C·J)/(η²L*)`, `W' = ((−1+Φ(∞))/χ(∞)·E − C·J)/(η²L*)`),
//! so the next kernel evaluation interpolates with the true derivative.
//! The contraction functions themselves live in [`crate::estimates`].

use crate::coefficients::{
    solid_decay_status, solid_lipschitz_decay_status, CheckStatus, CoefficientBounds, CoefficientSet, Phase,
    PhaseRanges,
};
use crate::error::{Error, Result};
use crate::estimates::Estimates;
use crate::joule_prefactor;
use crate::kernels::{compute_kernels, KernelTable};
use crate::profile::{graded_grid, uniform_grid, Domain, SimilarityProfile};
use crate::special::{one_minus_g, QuadratureSpec};
use crate::vapor::{PhysicalParams, VaporFront};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardSettings {
    pub tol: f64,
    pub max_iter: usize,
    pub grid_size: usize,
}

impl Default for PicardSettings {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 200,
            grid_size: 257,
        }
    }
}

impl PicardSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || self.max_iter < 1 || self.grid_size < 3 {
            return Err(Error::InvalidParameter(format!(
                "need tol > 0, max_iter >= 1, grid_size >= 3; got {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PicardResult {
    pub profile: SimilarityProfile,
    pub iterations: usize,
    pub final_update_norm: f64,
    /// `‖uₙ₊₁−uₙ‖/‖uₙ−uₙ₋₁‖`, recorded while the previous update is above
    /// the quadrature noise floor.
    pub contraction_ratios: Vec<f64>,
}

impl PicardResult {
    pub fn max_ratio(&self) -> Option<f64> {
        self.contraction_ratios.iter().copied().reduce(f64::max)
    }
}

/// Relative size below which successive updates are dominated by
/// quadrature noise and their ratios carry no information.
pub const RATIO_NOISE_FLOOR: f64 = 1e-9;

/// Truncation point of the solid grid, where the slowest admissible `E₂`
/// has fallen below `1e-16`.
pub fn eta_max(xi: f64, bounds: &CoefficientBounds, a: f64) -> f64 {
    (xi * xi + 36.84 * bounds.l_max / (a * a * bounds.n_min)).sqrt()
}

pub fn liquid_grid(alpha0: f64, xi: f64, n: usize) -> Vec<f64> {
    uniform_grid(alpha0, xi, n)
}

pub fn solid_grid(xi: f64, bounds: &CoefficientBounds, a: f64, n: usize) -> Vec<f64> {
    graded_grid(xi, eta_max(xi, bounds, a), n)
}

/// `u₁ ≡ 0` on `[α₀, ξ]`.
pub fn initial_liquid(alpha0: f64, xi: f64, n: usize) -> Result<SimilarityProfile> {
    let nodes = liquid_grid(alpha0, xi, n);
    let zeros = vec![0.0; n];
    SimilarityProfile::with_slopes(nodes, zeros.clone(), zeros, Domain::Liquid { alpha0, xi })
}

/// `u₂(η) = −(1 − ξ/η)` on the solid grid.
pub fn initial_solid(xi: f64, bounds: &CoefficientBounds, a: f64, n: usize) -> Result<SimilarityProfile> {
    let nodes = solid_grid(xi, bounds, a, n);
    let values = nodes.iter().map(|&e| -(1.0 - xi / e)).collect();
    let slopes = nodes.iter().map(|&e| -xi / (e * e)).collect();
    SimilarityProfile::with_slopes(nodes, values, slopes, Domain::Solid { xi })
}

/// Constant-coefficient profile with the slowest admissible Gaussian decay,
/// `1 + u₂ ∝ ∫_η^∞ e^{−w²v²}/v² dv` with `w² = a²N_m/L_M`. Used when the
/// solid Joule coefficient is nonzero: the algebraic guess decays too slowly
/// for the decay conditions on `K₂*`.
pub fn initial_solid_decaying(xi: f64, bounds: &CoefficientBounds, a: f64, n: usize) -> Result<SimilarityProfile> {
    let nodes = solid_grid(xi, bounds, a, n);
    let w = a * (bounds.n_min / bounds.l_max).sqrt();
    let denom = one_minus_g(w * xi);
    let mut values = Vec::with_capacity(n);
    let mut slopes = Vec::with_capacity(n);
    for &e in &nodes {
        let decay = (-w * w * (e * e - xi * xi)).exp();
        values.push(-1.0 + decay * xi * one_minus_g(w * e) / (e * denom));
        slopes.push(-decay * xi / (e * e * denom));
    }
    values[0] = 0.0;
    SimilarityProfile::with_slopes(nodes, values, slopes, Domain::Solid { xi })
}

/// `V(u₁)(η) = α₀²P*·(χ₁(ξ) − χ₁(η)) + Φ₁(ξ) − Φ₁(η)`.
pub fn apply_v(
    u1: &SimilarityProfile,
    front: &VaporFront,
    set: &CoefficientSet,
    p: &PhysicalParams,
    spec: &QuadratureSpec,
) -> Result<SimilarityProfile> {
    let q0 = front.alpha0 * front.alpha0 * front.p_star(p);
    let t = compute_kernels(u1, set, p.a, p.k, spec)?;
    let c = joule_prefactor(p.k, p.a);
    let (chi_xi, phi_xi) = (KernelTable::last(&t.chi), KernelTable::last(&t.phi));
    let n = t.len();
    let mut values: Vec<f64> = (0..n).map(|i| q0 * (chi_xi - t.chi[i]) + (phi_xi - t.phi[i])).collect();
    values[n - 1] = 0.0;
    let slopes = (0..n)
        .map(|i| {
            let v = t.nodes[i];
            -(q0 * t.e[i] + c * t.j[i]) / (v * v * t.l_star[i])
        })
        .collect();
    SimilarityProfile::with_slopes(t.nodes, values, slopes, u1.domain())
}

/// `W(u₂)(η) = (−1 + Φ₂(∞))·χ₂(η)/χ₂(∞) − Φ₂(η)`.
pub fn apply_w(
    u2: &SimilarityProfile,
    set: &CoefficientSet,
    p: &PhysicalParams,
    spec: &QuadratureSpec,
) -> Result<SimilarityProfile> {
    let t = compute_kernels(u2, set, p.a, p.k, spec)?;
    let (chi_inf, phi_inf) = match (t.chi_inf, t.phi_inf) {
        (Some(c), Some(f)) => (c, f),
        _ => return Err(Error::Invariant("solid kernels need a solid-domain profile".into())),
    };
    if !(chi_inf > 0.0) {
        return Err(Error::Invariant(format!("chi2(inf) must be positive, got {chi_inf}")));
    }
    let c = joule_prefactor(p.k, p.a);
    let lead = (-1.0 + phi_inf) / chi_inf;
    let n = t.len();
    let mut values: Vec<f64> = (0..n).map(|i| lead * t.chi[i] - t.phi[i]).collect();
    values[0] = 0.0;
    let slopes = (0..n)
        .map(|i| {
            let v = t.nodes[i];
            (lead * t.e[i] - c * t.j[i]) / (v * v * t.l_star[i])
        })
        .collect();
    SimilarityProfile::with_slopes(t.nodes, values, slopes, u2.domain())
}

/// Iterates `u ← op(u)` until the sup-norm update is at most `tol`.
/// `check` sees every new iterate together with its predecessor.
pub fn picard(
    mut op: impl FnMut(&SimilarityProfile) -> Result<SimilarityProfile>,
    init: SimilarityProfile,
    settings: &PicardSettings,
    mut check: impl FnMut(&SimilarityProfile, &SimilarityProfile) -> Result<()>,
) -> Result<PicardResult> {
    settings.validate()?;
    let mut u = init;
    let mut ratios = Vec::new();
    let mut prev_update: Option<f64> = None;
    let mut last = f64::INFINITY;
    for it in 1..=settings.max_iter {
        let next = op(&u)?;
        check(&next, &u)?;
        let update = next.sup_distance(&u);
        if !update.is_finite() {
            return Err(Error::NonConvergence {
                iterations: it,
                last_update: update,
                ratios,
            });
        }
        if let Some(pu) = prev_update {
            let floor = RATIO_NOISE_FLOOR * next.sup_norm().max(1.0);
            if pu > floor && update > floor {
                ratios.push(update / pu);
            }
        }
        prev_update = Some(update);
        last = update;
        u = next;
        if update <= settings.tol {
            return Ok(PicardResult {
                profile: u,
                iterations: it,
                final_update_norm: update,
                contraction_ratios: ratios,
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: settings.max_iter,
        last_update: last,
        ratios,
    })
}

/// What to do when an iterate leaves the hypotheses' domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationPolicy {
    Abort,
    /// Record a warning and keep iterating.
    Warn,
}

/// Per-iterate hypothesis checks: the phase range of `u` and, on the solid
/// side, the Joule decay conditions that couple coefficients with `u₂`.
pub struct IterateChecker<'a> {
    pub set: &'a CoefficientSet,
    pub bounds: &'a CoefficientBounds,
    pub ranges: &'a PhaseRanges,
    pub policy: ViolationPolicy,
    pub warnings: Vec<String>,
}

impl<'a> IterateChecker<'a> {
    pub fn new(
        set: &'a CoefficientSet,
        bounds: &'a CoefficientBounds,
        ranges: &'a PhaseRanges,
        policy: ViolationPolicy,
    ) -> Self {
        Self {
            set,
            bounds,
            ranges,
            policy,
            warnings: Vec::new(),
        }
    }

    fn violation(&mut self, tag: &'static str, detail: String) -> Result<()> {
        match self.policy {
            ViolationPolicy::Abort => Err(Error::Hypothesis { tag: tag.into(), detail }),
            ViolationPolicy::Warn => {
                if self.warnings.len() < 32 {
                    self.warnings.push(format!("{tag}: {detail}"));
                }
                Ok(())
            }
        }
    }

    pub fn check(&mut self, phase: Phase, u: &SimilarityProfile, prev: &SimilarityProfile) -> Result<()> {
        let (lo, hi) = self.ranges.get(phase);
        let slack = 1e-9 * (hi - lo);
        if let Some((x, v)) = u
            .nodes()
            .iter()
            .zip(u.values())
            .find(|(_, &v)| v < lo - slack || v > hi + slack)
        {
            self.violation(
                "iterate_in_phase_range",
                format!("u = {v} at eta = {x} outside [{lo}, {hi}]"),
            )?;
        }
        if phase == Phase::Solid && !self.set.solid.rho.is_identically_zero() {
            use crate::coefficients::tags;
            if let CheckStatus::Fail { at, excess } = solid_decay_status(self.bounds, self.set, u)? {
                self.violation(tags::K_DECAY_SOLID, format!("exceeded by {excess:e} at eta = {at}"))?;
            }
            if let CheckStatus::Fail { at, excess } =
                solid_lipschitz_decay_status(self.bounds, self.set, u, Some(prev))?
            {
                self.violation(tags::K_LIP_DECAY_SOLID, format!("exceeded by {excess:e} at eta = {at}"))?;
            }
        }
        Ok(())
    }
}

/// Solves `u₁ = V(u₁)` on `[α₀, ξ]` from `u₁ ≡ 0`.
#[allow(clippy::too_many_arguments)]
pub fn solve_liquid(
    xi: f64,
    front: &VaporFront,
    set: &CoefficientSet,
    p: &PhysicalParams,
    settings: &PicardSettings,
    spec: &QuadratureSpec,
    checker: &mut IterateChecker<'_>,
) -> Result<PicardResult> {
    let init = initial_liquid(front.alpha0, xi, settings.grid_size)?;
    picard(
        |u| apply_v(u, front, set, p, spec),
        init,
        settings,
        |u, prev| checker.check(Phase::Liquid, u, prev),
    )
}

/// Solves `u₂ = W(u₂)` on the truncated solid grid from `−(1 − ξ/η)`, or
/// from [`initial_solid_decaying`] when the solid Joule coefficient is
/// nonzero.
pub fn solve_solid(
    xi: f64,
    set: &CoefficientSet,
    p: &PhysicalParams,
    settings: &PicardSettings,
    spec: &QuadratureSpec,
    checker: &mut IterateChecker<'_>,
) -> Result<PicardResult> {
    let init = if set.solid.rho.is_identically_zero() {
        initial_solid(xi, checker.bounds, p.a, settings.grid_size)?
    } else {
        initial_solid_decaying(xi, checker.bounds, p.a, settings.grid_size)?
    };
    picard(
        |u| apply_w(u, set, p, spec),
        init,
        settings,
        |u, prev| checker.check(Phase::Solid, u, prev),
    )
}

pub fn epsilon1(z: f64, front: &VaporFront, bounds: &CoefficientBounds, p: &PhysicalParams) -> f64 {
    Estimates::new(*bounds, front, p).epsilon1(z)
}

pub fn xi_bar1(front: &VaporFront, bounds: &CoefficientBounds, p: &PhysicalParams) -> Result<f64> {
    Estimates::new(*bounds, front, p).xi_bar1()
}

pub fn epsilon2(z: f64, bounds: &CoefficientBounds, front: &VaporFront, p: &PhysicalParams) -> f64 {
    Estimates::new(*bounds, front, p).epsilon2(z)
}

pub fn check_condepsilon2(bounds: &CoefficientBounds, front: &VaporFront, p: &PhysicalParams) -> bool {
    Estimates::new(*bounds, front, p).check_condepsilon2()
}

pub fn xi_bar2(bounds: &CoefficientBounds, front: &VaporFront, p: &PhysicalParams) -> Result<f64> {
    Estimates::new(*bounds, front, p).xi_bar2()
}
