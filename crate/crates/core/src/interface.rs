//! Stefan condition at the melt front: evaluation of `Z(ξ)`, the
//! contraction windows, and the root search for `Z(ξ) = Mξ³`.
//!
//! With the fixed points `u₁ = V(u₁)` and `u₂ = W(u₂)` at a trial `ξ`,
//! `Z(ξ) = (−1 + Φ₂(∞))/χ₂(∞) + α₀²P*·E₁(ξ) + C·J₁(ξ)`, which is the
//! flux balance `L₁*u₁'(ξ) − L₂*u₂'(ξ) = −Mξ` multiplied by `−ξ²`.

use crate::coefficients::{CoefficientBounds, CoefficientSet, PhaseRanges};
use crate::error::{Error, Result};
use crate::estimates::Estimates;
use crate::fixed_point::{solve_liquid, solve_solid, IterateChecker, PicardResult, PicardSettings, ViolationPolicy};
use crate::kernels::{compute_kernels, kernel_q, QTerms};
use crate::special::QuadratureSpec;
use crate::vapor::{PhysicalParams, VaporFront};

/// Everything a solve needs, fully validated.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub params: PhysicalParams,
    pub front: VaporFront,
    pub set: CoefficientSet,
    pub bounds: CoefficientBounds,
    pub ranges: PhaseRanges,
    pub picard: PicardSettings,
    pub quadrature: QuadratureSpec,
    pub policy: ViolationPolicy,
}

impl Problem {
    pub fn estimates(&self) -> Estimates {
        Estimates::new(self.bounds, &self.front, &self.params)
    }

    pub fn alpha0(&self) -> f64 {
        self.front.alpha0
    }
}

/// Fixed points and Stefan-condition terms at one trial `ξ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZEvaluation {
    pub xi: f64,
    pub z: f64,
    /// `Z − Mξ³`
    pub f: f64,
    pub z1: f64,
    pub z2: f64,
    pub liquid: PicardResult,
    pub solid: PicardResult,
    pub chi_inf: f64,
    pub phi_inf: f64,
    pub q: QTerms,
    /// `Z` with the source integral taken as `∫K₁*/(s²L₁*)` and multiplied
    /// by `E₁(ξ)`, for comparison with the flux-consistent form.
    pub z_with_literal_source: f64,
    pub epsilon1: f64,
    pub epsilon2: f64,
    pub warnings: Vec<String>,
}

impl ZEvaluation {
    /// `Z₂ ≤ Z ≤ Z₁` up to a relative round-off slack.
    pub fn within_bounds(&self) -> bool {
        let slack = 1e-9 * self.z.abs().max(1.0);
        self.z2 <= self.z + slack && self.z <= self.z1 + slack
    }
}

/// Solves both fixed-point problems at `xi` and assembles `Z`. `xi_hat` is
/// the window end used by the upper bound `Z₁`.
pub fn evaluate_z(problem: &Problem, xi: f64, xi_hat: f64, settings: &PicardSettings) -> Result<ZEvaluation> {
    let alpha0 = problem.alpha0();
    if !(xi > alpha0) {
        return Err(Error::Domain(format!("xi = {xi} must exceed alpha0 = {alpha0}")));
    }
    let at = |e: Error| Error::AtXi {
        xi,
        source: Box::new(e),
    };
    let p = &problem.params;
    let spec = &problem.quadrature;
    let mut checker = IterateChecker::new(&problem.set, &problem.bounds, &problem.ranges, problem.policy);
    let liquid = solve_liquid(xi, &problem.front, &problem.set, p, settings, spec, &mut checker).map_err(at)?;
    let solid = solve_solid(xi, &problem.set, p, settings, spec, &mut checker).map_err(at)?;
    let t2 = compute_kernels(&solid.profile, &problem.set, p.a, p.k, spec).map_err(at)?;
    let (chi_inf, phi_inf) = (t2.chi_inf.unwrap_or(f64::NAN), t2.phi_inf.unwrap_or(f64::NAN));
    let q = kernel_q(xi, &liquid.profile, &problem.set, &problem.front, p, spec).map_err(at)?;
    let solid_term = (-1.0 + phi_inf) / chi_inf;
    let z = solid_term + q.q_times_e;
    let z_with_literal_source = solid_term + q.q * q.e_at_xi;
    let est = problem.estimates();
    Ok(ZEvaluation {
        xi,
        z,
        f: z - est.m * xi.powi(3),
        z1: est.z1(xi, xi_hat),
        z2: est.z2(xi),
        liquid,
        solid,
        chi_inf,
        phi_inf,
        q,
        z_with_literal_source,
        epsilon1: est.epsilon1(xi),
        epsilon2: est.epsilon2(xi),
        warnings: checker.warnings,
    })
}

/// `Z` at `xi` with the problem's own Picard settings and an unbounded
/// window.
pub fn z_value(problem: &Problem, xi: f64) -> Result<f64> {
    Ok(evaluate_z(problem, xi, f64::INFINITY, &problem.picard)?.z)
}

/// `(Z₁(ξ), Z₂(ξ))` for window end `xi_hat`.
pub fn z_bounds(xi: f64, xi_hat: f64, bounds: &CoefficientBounds, front: &VaporFront, p: &PhysicalParams) -> (f64, f64) {
    let e = Estimates::new(*bounds, front, p);
    (e.z1(xi, xi_hat), e.z2(xi))
}

/// Contraction windows and the existence conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Windows {
    pub alpha0: f64,
    pub xi_bar1: f64,
    pub xi_bar2: f64,
    pub solid_window_nonempty: bool,
    /// `min(ξ̄₁, ξ̄₂)`, possibly infinite.
    pub xi_hat: f64,
    /// Right end of the root search: `ξ̂` when finite, otherwise the first
    /// `α₀·2ᵐ` at which the upper existence condition holds.
    pub search_end: f64,
    /// `Z₁(ξ̂) ≤ Mξ̂³`, evaluated at `search_end`.
    pub upper_condition: bool,
    /// `Z₂(α₀) ≥ Mα₀³`.
    pub lower_condition: bool,
    /// The lower condition with the theorem's displayed `Z₂`.
    pub lower_condition_as_displayed: bool,
}

impl Windows {
    pub fn both_conditions(&self) -> bool {
        self.upper_condition && self.lower_condition
    }
    pub fn nonempty(&self) -> bool {
        self.search_end > self.alpha0
    }
}

pub fn windows(est: &Estimates) -> Result<Windows> {
    let xi_bar1 = est.xi_bar1()?;
    let xi_bar2 = est.xi_bar2()?;
    let xi_hat = xi_bar1.min(xi_bar2);
    let search_end = if xi_hat.is_finite() { xi_hat } else { est.search_cap()? };
    Ok(Windows {
        alpha0: est.alpha0,
        xi_bar1,
        xi_bar2,
        solid_window_nonempty: est.check_condepsilon2(),
        xi_hat,
        search_end,
        upper_condition: search_end > est.alpha0 && est.upper_flag(search_end),
        lower_condition: est.lower_flag(),
        lower_condition_as_displayed: est.lower_flag_as_displayed(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanPoint {
    pub xi: f64,
    /// `Z − Mξ³` at scan tolerance, `None` when the evaluation failed.
    pub f: Option<f64>,
    pub z: Option<f64>,
    pub z1: f64,
    pub z2: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct XiSolveResult {
    pub xi_star: f64,
    /// `Z(ξ*) − Mξ*³`
    pub z_residual: f64,
    pub bracket: (f64, f64),
    pub iterations: usize,
    pub windows: Windows,
    pub scan: Vec<ScanPoint>,
    /// Every scan interval with a sign change of `Z − Mξ³`.
    pub sign_changes: Vec<(f64, f64)>,
    /// Full-tolerance evaluation at `ξ*`.
    pub at_root: ZEvaluation,
    /// Evaluations (scan and refinement) where `Z₂ ≤ Z ≤ Z₁` failed.
    pub bound_violations: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XiSolveSettings {
    pub root_tol: f64,
    pub scan_points: usize,
    pub scan_tol: f64,
    pub max_refine: usize,
}

impl Default for XiSolveSettings {
    fn default() -> Self {
        Self {
            root_tol: 1e-9,
            scan_points: 32,
            scan_tol: 1e-6,
            max_refine: 100,
        }
    }
}

/// Scan points on `(α₀, end)`: one just past `α₀`, then `n` equal steps, the
/// last pulled slightly inside the window.
pub fn scan_grid(alpha0: f64, end: f64, n: usize) -> Vec<f64> {
    let w = end - alpha0;
    let mut pts = vec![alpha0 + 1e-6 * w];
    for i in 1..=n {
        pts.push(alpha0 + w * i as f64 / n as f64);
    }
    let last = pts.len() - 1;
    pts[last] = alpha0 + w * (1.0 - 1e-6);
    pts
}

/// Finds the smallest root of `Z(ξ) = Mξ³` on the window.
pub fn solve_xi(problem: &Problem, settings: &XiSolveSettings) -> Result<XiSolveResult> {
    let est = problem.estimates();
    let win = windows(&est)?;
    if !win.nonempty() {
        return Err(Error::Window(format!(
            "empty window: xi_hat = {} does not exceed alpha0 = {}",
            win.xi_hat, win.alpha0
        )));
    }
    let end = win.search_end;
    let coarse = PicardSettings {
        tol: problem.picard.tol.max(settings.scan_tol),
        ..problem.picard
    };
    let mut violations = Vec::new();
    let mut scan = Vec::new();
    let mut first_error = None;
    for xi in scan_grid(win.alpha0, end, settings.scan_points) {
        let (z1, z2) = (est.z1(xi, end), est.z2(xi));
        match evaluate_z(problem, xi, end, &coarse) {
            Ok(ev) => {
                if !ev.within_bounds() {
                    violations.push(xi);
                }
                scan.push(ScanPoint {
                    xi,
                    f: Some(ev.f),
                    z: Some(ev.z),
                    z1,
                    z2,
                    error: None,
                });
            }
            Err(e) => {
                scan.push(ScanPoint {
                    xi,
                    f: None,
                    z: None,
                    z1,
                    z2,
                    error: Some(e.to_string()),
                });
                first_error.get_or_insert((xi, e));
            }
        }
    }
    let mut sign_changes = Vec::new();
    for w in scan.windows(2) {
        if let (Some(f0), Some(f1)) = (w[0].f, w[1].f) {
            if f0 == 0.0 || f0.signum() != f1.signum() {
                sign_changes.push((w[0].xi, w[1].xi));
            }
        }
    }
    let Some(&(lo, hi)) = sign_changes.first() else {
        // a failed scan point explains a missing bracket better than the values
        if let Some((xi, e)) = first_error {
            return Err(match e {
                Error::AtXi { .. } => e,
                e => Error::AtXi {
                    xi,
                    source: Box::new(e),
                },
            });
        }
        return Err(Error::NoRoot {
            values: scan.iter().map(|s| (s.xi, s.f.unwrap_or(f64::NAN))).collect(),
        });
    };

    let full = problem.picard;
    let m = est.m;
    let accept = |ev: &ZEvaluation| ev.f.abs() <= settings.root_tol * (m * ev.xi.powi(3)).max(1.0);
    let mut eval = |xi: f64| -> Result<ZEvaluation> {
        let ev = evaluate_z(problem, xi, end, &full)?;
        if !ev.within_bounds() {
            violations.push(xi);
        }
        Ok(ev)
    };
    let mut a = eval(lo)?;
    let mut b = eval(hi)?;
    let mut iterations = 0;
    let (mut fa, mut fb) = (a.f, b.f);
    // which endpoint survived the previous step: -1 left, 1 right
    let mut kept = 0i8;
    let result = loop {
        if accept(&a) {
            break a;
        }
        if accept(&b) {
            break b;
        }
        if a.f.signum() == b.f.signum() {
            return Err(Error::NoRoot {
                values: vec![(a.xi, a.f), (b.xi, b.f)],
            });
        }
        if iterations >= settings.max_refine || (b.xi - a.xi) <= 4.0 * f64::EPSILON * b.xi {
            break if a.f.abs() < b.f.abs() { a } else { b };
        }
        iterations += 1;
        let mut x = b.xi - fb * (b.xi - a.xi) / (fb - fa);
        if !(x > a.xi && x < b.xi) {
            x = 0.5 * (a.xi + b.xi);
        }
        let c = eval(x)?;
        if c.f.signum() == a.f.signum() {
            fa = c.f;
            a = c;
            if kept == 1 {
                fb *= 0.5;
            }
            kept = 1;
        } else {
            fb = c.f;
            b = c;
            if kept == -1 {
                fa *= 0.5;
            }
            kept = -1;
        }
    };
    let bracket = (lo, hi);
    Ok(XiSolveResult {
        xi_star: result.xi,
        z_residual: result.f,
        bracket,
        iterations,
        windows: win,
        scan,
        sign_changes,
        at_root: result,
        bound_violations: violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::special::one_minus_g;

    use crate::testing::constant_problem;

    /// Closed form of `Z` for the constant problem: `χ₂(∞) = (1 − G(ξ))/ξ`.
    fn z_closed(xi: f64) -> f64 {
        -xi / one_minus_g(xi) + 2.5 * (-(xi * xi - 0.25)).exp()
    }

    #[test]
    fn z_matches_closed_form() {
        let pr = constant_problem(1.0);
        let z = z_value(&pr, 1.0).unwrap();
        assert!((z - z_closed(1.0)).abs() < 1e-9, "{z}");
        assert!((z + 2.949_133_198_8).abs() < 1e-9);
        let ev = evaluate_z(&pr, 0.8, 2.0, &pr.picard).unwrap();
        assert!(ev.within_bounds());
        // lower bound is exact for constant coefficients
        assert!((ev.z - ev.z2).abs() < 1e-9);
        assert_eq!(ev.z, ev.z_with_literal_source);
    }

    #[test]
    fn windows_for_constant_problem() {
        let pr = constant_problem(1.0);
        let w = windows(&pr.estimates()).unwrap();
        assert_eq!(w.xi_hat, f64::INFINITY);
        assert_eq!(w.search_end, 2.0);
        assert!(w.both_conditions());
    }

    #[test]
    fn solve_xi_finds_closed_form_root() {
        let pr = constant_problem(1.0);
        let r = solve_xi(&pr, &XiSolveSettings::default()).unwrap();
        let (mut lo, mut hi) = (0.5 + 1e-9, 2.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if z_closed(mid) - mid.powi(3) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((r.xi_star - lo).abs() < 1e-8, "{} vs {lo}", r.xi_star);
        assert!(r.z_residual.abs() <= 1e-9 * r.xi_star.powi(3).max(1.0));
        assert_eq!(r.sign_changes.len(), 1);
        assert!(r.bound_violations.is_empty());
        assert!(r.xi_star > 0.5 && r.xi_star < r.windows.search_end);
    }

    #[test]
    fn no_root_when_latent_heat_dominates() {
        let pr = constant_problem(50.0);
        let w = windows(&pr.estimates()).unwrap();
        assert!(!w.lower_condition);
        match solve_xi(&pr, &XiSolveSettings::default()) {
            Err(Error::NoRoot { values }) => assert!(values.iter().all(|(_, f)| *f < 0.0)),
            other => panic!("{other:?}"),
        }
    }
}
