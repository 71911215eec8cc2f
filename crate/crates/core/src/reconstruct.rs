//! Physical temperatures from a similarity solution, ODE and boundary
//! residuals, and an independent shooting solver for cross-checking.
//!
//! Both phases satisfy `ν' + 2a²η³N*(u)u' + C·K*(u)/η² = 0` with
//! `ν = L*(u)η²u'`. At the boiling front `ν(α₀) = −α₀²P*`; at the melt front
//! `u₁ = u₂ = 0` and `ν₁(ξ) − ν₂(ξ) = −Mξ³`; far away `u₂ → −1`.

use crate::coefficients::{CoefficientSet, Phase};
use crate::error::{Error, Result};
use crate::fixed_point::eta_max;
use crate::interface::Problem;
use crate::joule_prefactor;
use crate::profile::{fornberg_weights, refine_grid, Domain, SimilarityProfile};
use crate::vapor::PhysicalParams;

#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalSolution {
    pub u1: SimilarityProfile,
    pub u2: SimilarityProfile,
    pub xi_star: f64,
    pub alpha0: f64,
    pub p_star: f64,
    pub params: PhysicalParams,
    pub set: CoefficientSet,
}

impl PhysicalSolution {
    /// Boiling front `α(t) = 2a·α₀√t`.
    pub fn alpha(&self, t: f64) -> f64 {
        2.0 * self.params.a * self.alpha0 * t.sqrt()
    }

    /// Melt front `β(t) = 2a·ξ*√t`.
    pub fn beta(&self, t: f64) -> f64 {
        2.0 * self.params.a * self.xi_star * t.sqrt()
    }

    pub fn eta(&self, r: f64, t: f64) -> f64 {
        r / (2.0 * self.params.a * t.sqrt())
    }

    /// Dimensionless temperature at similarity coordinate `eta ≥ α₀`.
    pub fn u_at(&self, eta: f64) -> Result<f64> {
        if eta < self.alpha0 {
            return Err(Error::Domain(format!(
                "eta = {eta} lies in the vapor zone (below alpha0 = {}); use vapor_temperature",
                self.alpha0
            )));
        }
        Ok(if eta <= self.xi_star {
            self.u1.eval(eta)
        } else {
            self.u2.eval(eta)
        })
    }

    /// `θ(r, t) = θ_m(u(η) + 1)` outside the vapor zone.
    pub fn temperature(&self, r: f64, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::Domain(format!("time must be positive, got {t}")));
        }
        let u = self.u_at(self.eta(r, t))?;
        Ok(self.params.theta_m * (u + 1.0))
    }
}

/// Per-phase ODE residual summary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeResidual {
    /// `max |ν' + 2a²η³N*u' + CK*/η²|` divided by the largest magnitude of
    /// any of the three terms on the grid.
    pub max_normalized: f64,
    /// Location of the maximum.
    pub at: f64,
    pub scale: f64,
}

fn domain_phase(p: &SimilarityProfile) -> Phase {
    match p.domain() {
        Domain::Liquid { .. } => Phase::Liquid,
        Domain::Solid { .. } => Phase::Solid,
    }
}

/// Derivative at `xs[i]` from the 5-point Fornberg stencil nearest to `i`.
fn stencil_derivative(xs: &[f64], ys: &[f64], i: usize) -> f64 {
    let n = xs.len();
    let start = i.saturating_sub(2).min(n - 5);
    let w = fornberg_weights(xs[i], &xs[start..start + 5], 1);
    (0..5).map(|j| w[1][j] * ys[start + j]).sum()
}

/// Degree-5 local interpolation of `data` (or its derivative for
/// `order = 1`) at `x` from the six nodes around it.
fn local_interp(nodes: &[f64], data: &[f64], x: f64, order: usize) -> f64 {
    let n = nodes.len();
    if n < 6 {
        let w = fornberg_weights(x, nodes, order);
        return (0..n).map(|j| w[order][j] * data[j]).sum();
    }
    let i = nodes.partition_point(|&v| v <= x).saturating_sub(1);
    let start = i.saturating_sub(2).min(n - 6);
    let w = fornberg_weights(x, &nodes[start..start + 6], order);
    (0..6).map(|j| w[order][j] * data[start + j]).sum()
}

/// ODE residual of one phase on the `refine`-times refined grid. Values and
/// slopes between nodes come from local degree-5 interpolation of the node
/// data (slopes are interpolated directly when the profile carries exact
/// ones), so the check is not limited by the cubic interpolant.
pub fn ode_residual(
    profile: &SimilarityProfile,
    set: &CoefficientSet,
    a: f64,
    k: f64,
    refine: usize,
) -> Result<OdeResidual> {
    if profile.len() < 2 {
        return Err(Error::InvalidParameter("profile too short for residuals".into()));
    }
    let phase = domain_phase(profile);
    let xs = refine_grid(profile.nodes(), refine.max(1));
    if xs.len() < 5 {
        return Err(Error::InvalidParameter("need at least five points for residuals".into()));
    }
    let c = joule_prefactor(k, a);
    let (nodes, values, slopes) = (profile.nodes(), profile.values(), profile.slopes());
    let mut nu = Vec::with_capacity(xs.len());
    let mut conv = Vec::with_capacity(xs.len());
    let mut src = Vec::with_capacity(xs.len());
    for &x in &xs {
        let u = local_interp(nodes, values, x, 0);
        let du = if profile.has_exact_slopes() {
            local_interp(nodes, slopes, x, 0)
        } else {
            local_interp(nodes, values, x, 1)
        };
        let st = set.starred(phase, u)?;
        nu.push(st.l * x * x * du);
        conv.push(2.0 * a * a * x.powi(3) * st.n * du);
        src.push(c * st.k / (x * x));
    }
    let mut scale: f64 = 0.0;
    let mut res = Vec::with_capacity(xs.len());
    for i in 0..xs.len() {
        let dnu = stencil_derivative(&xs, &nu, i);
        scale = scale.max(dnu.abs()).max(conv[i].abs()).max(src[i].abs());
        res.push(dnu + conv[i] + src[i]);
    }
    if scale == 0.0 {
        return Ok(OdeResidual {
            max_normalized: 0.0,
            at: xs[0],
            scale,
        });
    }
    let (i, r) = res
        .iter()
        .enumerate()
        .map(|(i, r)| (i, r.abs()))
        .fold((0, 0.0), |acc, (i, r)| if r > acc.1 { (i, r) } else { acc });
    Ok(OdeResidual {
        max_normalized: r / scale,
        at: xs[i],
        scale,
    })
}

/// The five boundary-condition residuals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BcResiduals {
    /// `|L₁*u₁'(α₀) + P*| / P*`
    pub boiling_flux: f64,
    /// `|u₁(ξ)|`
    pub liquid_melt: f64,
    /// `|u₂(ξ)|`
    pub solid_melt: f64,
    /// `|L₁*u₁'(ξ) − L₂*u₂'(ξ) + Mξ| / max(1, Mξ)`
    pub stefan: f64,
    /// `|u₂(η_max) + 1|`
    pub far_field: f64,
}

impl BcResiduals {
    pub fn max(&self) -> f64 {
        [self.boiling_flux, self.liquid_melt, self.solid_melt, self.stefan, self.far_field]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

/// One-sided 4th-order derivative at the first (`forward`) or last node.
fn one_sided(p: &SimilarityProfile, forward: bool) -> f64 {
    let n = p.len();
    let (xs, ys): (Vec<f64>, Vec<f64>) = if forward {
        (p.nodes()[..5].to_vec(), p.values()[..5].to_vec())
    } else {
        (p.nodes()[n - 5..].to_vec(), p.values()[n - 5..].to_vec())
    };
    let x0 = if forward { xs[0] } else { xs[4] };
    let w = fornberg_weights(x0, &xs, 1);
    (0..5).map(|j| w[1][j] * ys[j]).sum()
}

pub fn bc_residuals(sol: &PhysicalSolution) -> Result<BcResiduals> {
    if sol.u1.len() < 5 || sol.u2.len() < 5 {
        return Err(Error::InvalidParameter("boundary residuals need at least five nodes per phase".into()));
    }
    let xi = sol.xi_star;
    let m = sol.params.stefan_m();
    let l1a = sol.set.starred(Phase::Liquid, sol.u1.values()[0])?.l;
    let l1x = sol.set.starred(Phase::Liquid, sol.u1.values()[sol.u1.len() - 1])?.l;
    let l2x = sol.set.starred(Phase::Solid, sol.u2.values()[0])?.l;
    let d1a = one_sided(&sol.u1, true);
    let d1x = one_sided(&sol.u1, false);
    let d2x = one_sided(&sol.u2, true);
    Ok(BcResiduals {
        boiling_flux: (l1a * d1a + sol.p_star).abs() / sol.p_star,
        liquid_melt: sol.u1.values()[sol.u1.len() - 1].abs(),
        solid_melt: sol.u2.values()[0].abs(),
        stefan: (l1x * d1x - l2x * d2x + m * xi).abs() / (m * xi).max(1.0),
        far_field: (sol.u2.values()[sol.u2.len() - 1] + 1.0).abs(),
    })
}

/// Settings of the shooting oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootingSettings {
    pub steps: usize,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for ShootingSettings {
    fn default() -> Self {
        Self {
            steps: 4096,
            tol: 1e-10,
            max_iter: 60,
        }
    }
}

/// Result of the shooting oracle for both phases.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleProfiles {
    pub u1: SimilarityProfile,
    pub u2: SimilarityProfile,
    /// Final `|u₁(ξ)|`.
    pub liquid_miss: f64,
    /// Final `|u₂(η_max) + 1|`.
    pub solid_miss: f64,
}

struct Rhs<'a> {
    set: &'a CoefficientSet,
    phase: Phase,
    a2: f64,
    c: f64,
}

impl Rhs<'_> {
    /// `(u', ν')` for the state `(u, ν)` at `η`.
    fn eval(&self, eta: f64, u: f64, nu: f64) -> Result<(f64, f64)> {
        let st = self.set.starred(self.phase, u)?;
        let du = nu / (st.l * eta * eta);
        Ok((du, -2.0 * self.a2 * eta.powi(3) * st.n * du - self.c * st.k / (eta * eta)))
    }

    /// Classical RK4 from `lo` to `hi`; returns nodes, `u`, `u'`.
    fn integrate(&self, lo: f64, hi: f64, u0: f64, nu0: f64, steps: usize) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        let h = (hi - lo) / steps as f64;
        let mut xs = Vec::with_capacity(steps + 1);
        let mut us = Vec::with_capacity(steps + 1);
        let mut ds = Vec::with_capacity(steps + 1);
        let (mut u, mut nu) = (u0, nu0);
        for i in 0..=steps {
            let x = if i == steps { hi } else { lo + h * i as f64 };
            let (k1u, k1n) = self.eval(x, u, nu)?;
            xs.push(x);
            us.push(u);
            ds.push(k1u);
            if i == steps {
                break;
            }
            let (k2u, k2n) = self.eval(x + 0.5 * h, u + 0.5 * h * k1u, nu + 0.5 * h * k1n)?;
            let (k3u, k3n) = self.eval(x + 0.5 * h, u + 0.5 * h * k2u, nu + 0.5 * h * k2n)?;
            let (k4u, k4n) = self.eval(x + h, u + h * k3u, nu + h * k3n)?;
            u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
            nu += h / 6.0 * (k1n + 2.0 * k2n + 2.0 * k3n + k4n);
            if !(u.is_finite() && nu.is_finite()) {
                return Err(Error::Oracle(format!("shooting trajectory diverged at eta = {x}")));
            }
        }
        Ok((xs, us, ds))
    }
}

/// Secant iteration on the shooting parameter `s` for `miss(s) = 0`.
fn secant(mut miss: impl FnMut(f64) -> Result<f64>, s0: f64, s1: f64, st: &ShootingSettings) -> Result<f64> {
    let (mut x0, mut x1) = (s0, s1);
    let (mut f0, mut f1) = (miss(x0)?, miss(x1)?);
    for _ in 0..st.max_iter {
        if f1.abs() <= st.tol {
            return Ok(x1);
        }
        if f1 == f0 {
            break;
        }
        let x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
        (x0, f0) = (x1, f1);
        x1 = x2;
        f1 = miss(x1)?;
    }
    if f1.abs() <= st.tol {
        return Ok(x1);
    }
    Err(Error::Oracle(format!("secant stalled with miss {f1:e} at s = {x1}")))
}

/// Solves both boundary-value problems by shooting at melt coefficient
/// `xi`; the solid side is truncated at `eta_end`.
pub fn shooting_oracle(problem: &Problem, xi: f64, eta_end: f64, st: &ShootingSettings) -> Result<OracleProfiles> {
    let p = &problem.params;
    let alpha0 = problem.alpha0();
    let p_star = problem.front.p_star(p);
    let c = joule_prefactor(p.k, p.a);
    let a2 = p.a * p.a;
    let liquid = Rhs {
        set: &problem.set,
        phase: Phase::Liquid,
        a2,
        c,
    };
    let solid = Rhs {
        set: &problem.set,
        phase: Phase::Solid,
        a2,
        c,
    };
    let nu0 = -alpha0 * alpha0 * p_star;

    // liquid: unknown u(α₀), target u(ξ) = 0
    let l0 = problem.set.starred(Phase::Liquid, 0.0)?.l;
    let guess = alpha0 * alpha0 * p_star * (1.0 / alpha0 - 1.0 / xi) / l0;
    let shoot_l = |s: f64| -> Result<f64> {
        let (_, us, _) = liquid.integrate(alpha0, xi, s, nu0, st.steps)?;
        Ok(us[us.len() - 1])
    };
    let s1 = secant(shoot_l, guess, guess * 1.01 + 1e-3, st)?;
    let (xs, us, ds) = liquid.integrate(alpha0, xi, s1, nu0, st.steps)?;
    let liquid_miss = us[us.len() - 1].abs();
    let u1 = SimilarityProfile::with_slopes(xs, us, ds, Domain::Liquid { alpha0, xi })?;

    // solid: unknown ν(ξ), target u(η_end) = −1
    let l2 = problem.set.starred(Phase::Solid, 0.0)?.l;
    let guess = -l2 * xi;
    let shoot_s = |s: f64| -> Result<f64> {
        let (_, us, _) = solid.integrate(xi, eta_end, 0.0, s, st.steps)?;
        Ok(us[us.len() - 1] + 1.0)
    };
    let s2 = secant(shoot_s, guess, guess * 1.01, st)?;
    let (xs, us, ds) = solid.integrate(xi, eta_end, 0.0, s2, st.steps)?;
    let solid_miss = (us[us.len() - 1] + 1.0).abs();
    let u2 = SimilarityProfile::with_slopes(xs, us, ds, Domain::Solid { xi })?;
    Ok(OracleProfiles {
        u1,
        u2,
        liquid_miss,
        solid_miss,
    })
}

/// Sup-norm distance between `picard` and `oracle`, sampled at the Picard
/// nodes.
pub fn oracle_distance(picard: &SimilarityProfile, oracle: &SimilarityProfile) -> f64 {
    picard
        .nodes()
        .iter()
        .zip(picard.values())
        .map(|(&x, &v)| (v - oracle.eval(x)).abs())
        .fold(0.0, f64::max)
}

/// Default right end of the solid domain for `problem` at `xi`.
pub fn solid_end(problem: &Problem, xi: f64) -> f64 {
    eta_max(xi, &problem.bounds, problem.params.a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interface::{solve_xi, XiSolveSettings};
    use crate::testing::{constant_problem, joule_problem};

    fn solve(problem: &Problem) -> PhysicalSolution {
        let r = solve_xi(problem, &XiSolveSettings::default()).unwrap();
        PhysicalSolution {
            u1: r.at_root.liquid.profile.clone(),
            u2: r.at_root.solid.profile.clone(),
            xi_star: r.xi_star,
            alpha0: problem.alpha0(),
            p_star: problem.front.p_star(&problem.params),
            params: problem.params,
            set: problem.set.clone(),
        }
    }

    #[test]
    fn temperatures_and_fronts() {
        let sol = solve(&constant_problem(1.0));
        let t = 2.0;
        assert!((sol.temperature(sol.beta(t), t).unwrap() - 1.0).abs() < 1e-12);
        assert!(sol.temperature(1e3, t).unwrap().abs() < 1e-12);
        assert!(matches!(sol.temperature(0.5 * sol.alpha(t), t), Err(Error::Domain(_))));
        assert!(sol.beta(t) > sol.alpha(t));
        // same η at two times
        let (r1, t1) = (0.9, 0.5);
        let t2: f64 = 3.7;
        let r2 = r1 * (t2 / t1).sqrt();
        let (a, b) = (sol.temperature(r1, t1).unwrap(), sol.temperature(r2, t2).unwrap());
        assert!((a - b).abs() <= 1e-12 * a.abs());
    }

    #[test]
    fn residuals_small_for_converged_solves() {
        for pr in [constant_problem(1.0), joule_problem()] {
            let sol = solve(&pr);
            let bc = bc_residuals(&sol).unwrap();
            assert!(bc.max() < 1e-6, "{bc:?}");
            assert_eq!(bc.liquid_melt, 0.0);
            assert_eq!(bc.solid_melt, 0.0);
            for u in [&sol.u1, &sol.u2] {
                let r = ode_residual(u, &sol.set, pr.params.a, pr.params.k, 4).unwrap();
                assert!(r.max_normalized < 1e-6, "{r:?}");
            }
        }
    }

    #[test]
    fn perturbed_profile_has_large_residual() {
        let pr = constant_problem(1.0);
        let sol = solve(&pr);
        let (lo, hi) = (sol.u1.lo(), sol.u1.hi());
        let mid = 0.5 * (lo + hi);
        let w = 0.1 * (hi - lo);
        let bumped = SimilarityProfile::from_fn(sol.u1.nodes().to_vec(), sol.u1.domain(), |x| {
            sol.u1.eval(x) + 0.01 * (-((x - mid) / w).powi(2)).exp()
        })
        .unwrap();
        let r = ode_residual(&bumped, &sol.set, 1.0, 0.0, 4).unwrap();
        assert!(r.max_normalized > 1e-3);
    }

    #[test]
    fn shooting_agrees_with_picard() {
        for pr in [constant_problem(1.0), joule_problem()] {
            let sol = solve(&pr);
            let end = sol.u2.hi();
            let o = shooting_oracle(&pr, sol.xi_star, end, &ShootingSettings::default()).unwrap();
            assert!(o.liquid_miss < 1e-10 && o.solid_miss < 1e-10);
            let d1 = oracle_distance(&sol.u1, &o.u1);
            let d2 = oracle_distance(&sol.u2, &o.u2);
            assert!(d1 < 1e-7 && d2 < 1e-7, "{d1:e} {d2:e}");
        }
    }
}
