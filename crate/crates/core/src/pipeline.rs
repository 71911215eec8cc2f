//! Config-driven commands: `check` (hypotheses and windows only), `solve`,
//! `oracle` (solve plus shooting comparison) and single sweep rows.

use std::time::Instant;

use crate::coefficients::{check_hypotheses, estimate_bounds, CoefficientBounds, HypothesisReport, PhaseRanges};
use crate::config::{BoundsSpec, RunConfig};
use crate::error::{Error, Result};
use crate::fixed_point::ViolationPolicy;
use crate::interface::{solve_xi, windows, Problem, XiSolveResult, ZEvaluation};
use crate::kernels::compute_kernels;
use crate::reconstruct::{
    bc_residuals, ode_residual, oracle_distance, shooting_oracle, BcResiduals, OdeResidual, PhysicalSolution,
    ShootingSettings,
};
use crate::report::SolveReport;
use crate::special::Limit;
use crate::vapor::{alpha0, check_ignition, VaporFront};

/// Refinement factor of the ODE residual grid.
pub const RESIDUAL_REFINE: usize = 4;
/// Agreement required between Picard and shooting profiles.
pub const ORACLE_TOL: f64 = 1e-6;

/// Hypothesis constants for `config`, estimated or explicit.
pub fn resolve_bounds(config: &RunConfig, ranges: &PhaseRanges) -> Result<CoefficientBounds> {
    let a = config.params.a;
    let b = match &config.bounds {
        BoundsSpec::Explicit(b) => *b,
        BoundsSpec::Auto {
            samples,
            safety,
            overrides,
        } => {
            let mut b = estimate_bounds(&config.coefficients, ranges, a, *samples, *safety)?;
            BoundsSpec::apply_overrides(overrides, &mut b);
            b
        }
    };
    b.validate(a)?;
    Ok(b)
}

/// Builds the solver problem; fails when the boiling front does not exist.
pub fn build_problem(config: &RunConfig, policy: ViolationPolicy) -> Result<Problem> {
    let p = config.params;
    p.validate()?;
    let front = alpha0(&p)?;
    let ranges = PhaseRanges::physical(p.theta_m, p.theta_b);
    for phase in [crate::Phase::Liquid, crate::Phase::Solid] {
        config.coefficients.validate_on(phase, ranges.get(phase), config.check_samples)?;
    }
    let bounds = resolve_bounds(config, &ranges)?;
    Ok(Problem {
        params: p,
        front,
        set: config.coefficients.clone(),
        bounds,
        ranges,
        picard: config.picard,
        quadrature: config.quadrature,
        policy,
    })
}

/// Static part of every report: ignition, front, hypotheses and windows.
pub struct CheckOutcome {
    pub report: SolveReport,
    pub problem: Option<Problem>,
}

pub fn cmd_check(config: &RunConfig) -> Result<CheckOutcome> {
    let start = Instant::now();
    let p = config.params;
    let mut report = SolveReport::new(&p);
    report.ignition = check_ignition(&p);
    if !report.ignition {
        report.notes.push(format!(
            "ignition condition violated: P = {} < {}",
            p.p,
            p.ignition_threshold()
        ));
        report.seconds = start.elapsed().as_secs_f64();
        return Ok(CheckOutcome { report, problem: None });
    }
    let problem = build_problem(config, ViolationPolicy::Abort)?;
    fill_static(&mut report, &problem, config)?;
    report.seconds = start.elapsed().as_secs_f64();
    Ok(CheckOutcome {
        report,
        problem: Some(problem),
    })
}

fn fill_static(report: &mut SolveReport, problem: &Problem, config: &RunConfig) -> Result<()> {
    let front: VaporFront = problem.front;
    report.front = Some(front);
    report.p_star = Some(front.p_star(&problem.params));
    report.bounds = Some(problem.bounds);
    let hyp: HypothesisReport = check_hypotheses(
        &problem.bounds,
        &problem.set,
        &problem.ranges,
        problem.params.a,
        config.check_samples,
        None,
    )?;
    report.hypotheses = hyp;
    let est = problem.estimates();
    match windows(&est) {
        Ok(w) => report.windows = Some(w),
        Err(e) => report.notes.push(format!("window computation failed: {e}")),
    }
    Ok(())
}

/// A converged solve with its diagnostics.
pub struct SolveOutcome {
    pub report: SolveReport,
    pub problem: Problem,
    pub xi: XiSolveResult,
    pub solution: PhysicalSolution,
}

pub fn solution_from(problem: &Problem, xi: &XiSolveResult) -> PhysicalSolution {
    PhysicalSolution {
        u1: xi.at_root.liquid.profile.clone(),
        u2: xi.at_root.solid.profile.clone(),
        xi_star: xi.xi_star,
        alpha0: problem.alpha0(),
        p_star: problem.front.p_star(&problem.params),
        params: problem.params,
        set: problem.set.clone(),
    }
}

/// Runs the full pipeline. Without `force`, any failed static check stops
/// the run before solving; with it, the failures are reported and iterate
/// violations become warnings.
pub fn cmd_solve(config: &RunConfig, force: bool) -> Result<SolveOutcome> {
    let start = Instant::now();
    let checked = cmd_check(config)?;
    let mut report = checked.report;
    let Some(problem) = checked.problem else {
        return Err(Error::Model(report.notes.join("; ")));
    };
    if !force {
        if let Some(reason) = report.blocking_failure() {
            return Err(Error::Hypothesis {
                tag: reason.0,
                detail: format!("{} (use --force to solve anyway)", reason.1),
            });
        }
    }
    let problem = Problem {
        policy: if force { ViolationPolicy::Warn } else { ViolationPolicy::Abort },
        ..problem
    };
    let xi = solve_xi(&problem, &config.xi_solve)?;
    let solution = solution_from(&problem, &xi);
    let bc = bc_residuals(&solution)?;
    let ode = [
        ode_residual(&solution.u1, &problem.set, problem.params.a, problem.params.k, RESIDUAL_REFINE)?,
        ode_residual(&solution.u2, &problem.set, problem.params.a, problem.params.k, RESIDUAL_REFINE)?,
    ];
    let lemma = kernel_bound_checks(&problem, &xi.at_root)?;
    report.fill_solve(&xi, bc, ode, lemma);
    report.seconds = start.elapsed().as_secs_f64();
    Ok(SolveOutcome {
        report,
        problem,
        xi,
        solution,
    })
}

/// Sup-norm discrepancies between Picard and shooting profiles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleComparison {
    pub liquid: f64,
    pub solid: f64,
    pub liquid_miss: f64,
    pub solid_miss: f64,
}

impl OracleComparison {
    pub fn agrees(&self, tol: f64) -> bool {
        self.liquid <= tol && self.solid <= tol
    }
}

pub fn compare_with_oracle(problem: &Problem, solution: &PhysicalSolution) -> Result<OracleComparison> {
    let o = shooting_oracle(problem, solution.xi_star, solution.u2.hi(), &ShootingSettings::default())?;
    Ok(OracleComparison {
        liquid: oracle_distance(&solution.u1, &o.u1),
        solid: oracle_distance(&solution.u2, &o.u2),
        liquid_miss: o.liquid_miss,
        solid_miss: o.solid_miss,
    })
}

pub fn cmd_oracle(config: &RunConfig, force: bool) -> Result<(SolveOutcome, OracleComparison)> {
    let mut out = cmd_solve(config, force)?;
    let cmp = compare_with_oracle(&out.problem, &out.solution)?;
    out.report.oracle = Some(cmp);
    Ok((out, cmp))
}

/// Count of pointwise violations per kernel bound at one evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundCheck {
    pub tag: &'static str,
    pub violations: usize,
    pub points: usize,
}

/// Checks the a-priori kernel bounds pointwise on the fixed points of `ev`:
/// the `E` sandwiches, the `χ` bounds (including the elementary one) and
/// the uniform `Φ₂` bound.
pub fn kernel_bound_checks(problem: &Problem, ev: &ZEvaluation) -> Result<Vec<BoundCheck>> {
    let p = &problem.params;
    let est = problem.estimates();
    let t1 = compute_kernels(&ev.liquid.profile, &problem.set, p.a, p.k, &problem.quadrature)?;
    let t2 = compute_kernels(&ev.solid.profile, &problem.set, p.a, p.k, &problem.quadrature)?;
    let xi = ev.xi;
    let rel = |x: f64| 1e-9 * x.abs().max(1e-300) + 1e-14;
    let mut checks = Vec::new();
    let mut push = |tag: &'static str, flags: Vec<bool>| {
        checks.push(BoundCheck {
            tag,
            violations: flags.iter().filter(|ok| !**ok).count(),
            points: flags.len(),
        })
    };

    push(
        "liquid_kernel_sandwich",
        t1.nodes
            .iter()
            .zip(&t1.e)
            .map(|(&eta, &e)| {
                let (lo, hi) = est.e1_bounds(eta);
                lo <= e + rel(e) && e <= hi + rel(e)
            })
            .collect(),
    );
    push(
        "solid_kernel_sandwich",
        t2.nodes
            .iter()
            .zip(&t2.e)
            .map(|(&eta, &e)| {
                let (lo, hi) = est.e2_bounds(eta, xi);
                lo <= e + rel(e) && e <= hi + rel(e)
            })
            .collect(),
    );
    let mut chi1 = Vec::new();
    for (&eta, &c) in t1.nodes.iter().zip(&t1.chi) {
        chi1.push(c <= est.chi1_upper(eta)? + rel(c));
    }
    push("liquid_chi_upper", chi1);
    let mut chi2 = Vec::new();
    let mut chi2_elem = Vec::new();
    let inf = t2.chi_inf.into_iter().map(|c| (Limit::Infinity, c));
    for (eta, c) in t2.nodes.iter().map(|&e| Limit::Finite(e)).zip(t2.chi.iter().copied()).chain(inf) {
        let (lo, hi) = est.chi2_bounds(eta, xi)?;
        chi2.push(lo <= c + rel(c) && c <= hi + rel(c));
        chi2_elem.push(c <= est.chi2_elementary(eta, xi) + rel(c));
    }
    push("solid_chi_sandwich", chi2);
    push("solid_chi_elementary", chi2_elem);
    let phi_bound = est.phi2_upper(xi);
    push(
        "solid_phi_upper",
        t2.phi
            .iter()
            .chain(t2.phi_inf.iter())
            .map(|&f| f <= phi_bound + rel(phi_bound))
            .collect(),
    );
    Ok(checks)
}

/// One row of a parameter sweep; failures are recorded, not raised.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub alpha0: Option<f64>,
    pub xi_star: Option<f64>,
    pub max_bc_residual: Option<f64>,
    pub max_ode_residual: Option<f64>,
    pub error: Option<String>,
}

pub fn sweep_row(config: &RunConfig, parameter: &str, value: f64, force: bool) -> SweepRow {
    let mut row = SweepRow {
        value,
        alpha0: None,
        xi_star: None,
        max_bc_residual: None,
        max_ode_residual: None,
        error: None,
    };
    let cfg = match config.with_parameter(parameter, value) {
        Ok(c) => c,
        Err(e) => {
            row.error = Some(e.to_string());
            return row;
        }
    };
    if let Ok(front) = alpha0(&cfg.params) {
        row.alpha0 = Some(front.alpha0);
    }
    match cmd_solve(&cfg, force) {
        Ok(out) => {
            row.xi_star = Some(out.xi.xi_star);
            row.max_bc_residual = out.report.bc.map(|b: BcResiduals| b.max());
            row.max_ode_residual = out
                .report
                .ode
                .map(|o: [OdeResidual; 2]| o[0].max_normalized.max(o[1].max_normalized));
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

/// `count` equally spaced values on `[lo, hi]`.
pub fn sweep_values(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        n => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// CSV export of both profiles: `eta,u,theta_at_t1,phase`.
pub fn profile_csv(solution: &PhysicalSolution) -> String {
    let theta_m = solution.params.theta_m;
    let mut s = String::from("eta,u,theta_at_t1,phase\n");
    for (phase, prof) in [(1, &solution.u1), (2, &solution.u2)] {
        for (&eta, &u) in prof.nodes().iter().zip(prof.values()) {
            s.push_str(&format!("{eta:.15e},{u:.15e},{:.15e},{phase}\n", theta_m * (u + 1.0)));
        }
    }
    s
}

/// Physical temperature along `r` at time `t`, vapor zone included:
/// `r,theta,zone` with zone 0 (vapor), 1 (liquid) or 2 (solid). Radii are
/// the similarity nodes mapped to `t`, plus `vapor_points` uniform radii in
/// the vapor zone.
pub fn snapshot_csv(solution: &PhysicalSolution, front: &VaporFront, t: f64, vapor_points: usize) -> Result<String> {
    let p = &solution.params;
    let scale = 2.0 * p.a * t.sqrt();
    let mut s = String::from("r,theta,zone\n");
    let alpha = front.position(p, t);
    for i in 0..vapor_points {
        let r = alpha * i as f64 / vapor_points as f64;
        let th = crate::vapor::vapor_temperature(r, t, front, p)?;
        s.push_str(&format!("{r:.15e},{th:.15e},0\n"));
    }
    for (zone, prof) in [(1, &solution.u1), (2, &solution.u2)] {
        for &eta in prof.nodes() {
            let r = scale * eta;
            let th = solution.temperature(r, t)?;
            s.push_str(&format!("{r:.15e},{th:.15e},{zone}\n"));
        }
    }
    Ok(s)
}
