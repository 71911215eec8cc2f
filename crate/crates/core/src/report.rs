//! Run reports: a human-readable summary followed by a deterministic
//! `tag = value` section that scripts and tests can parse.

use std::fmt::Write as _;

use crate::coefficients::{CheckStatus, CoefficientBounds, HypothesisReport};
use crate::interface::{Windows, XiSolveResult};
use crate::pipeline::{BoundCheck, OracleComparison};
use crate::reconstruct::{BcResiduals, OdeResidual};
use crate::vapor::{PhysicalParams, VaporFront};

/// Summary of the melt-front solve.
#[derive(Debug, Clone, PartialEq)]
pub struct XiSummary {
    pub xi_star: f64,
    pub z_residual: f64,
    pub bracket: (f64, f64),
    pub refine_iterations: usize,
    pub sign_changes: usize,
    /// Scan points at which `Z₂ ≤ Z ≤ Z₁` failed.
    pub bound_violations: usize,
    /// Scan points at which the inner solves failed.
    pub scan_failures: usize,
}

/// Fixed-point statistics of one phase at the root.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardStats {
    pub iterations: usize,
    pub final_update: f64,
    /// Largest observed ratio of successive updates, if any were recorded.
    pub max_ratio: Option<f64>,
    /// Theoretical contraction constant at `ξ*`.
    pub epsilon: f64,
}

impl PicardStats {
    /// The map is certified when `ε < 1` and the observed ratios stay
    /// below it.
    pub fn certified(&self) -> bool {
        self.epsilon < 1.0 && self.max_ratio.is_none_or(|r| r <= self.epsilon * (1.0 + 1e-9))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub params: PhysicalParams,
    pub ignition: bool,
    pub front: Option<VaporFront>,
    pub p_star: Option<f64>,
    pub bounds: Option<CoefficientBounds>,
    pub hypotheses: HypothesisReport,
    pub windows: Option<Windows>,
    pub xi: Option<XiSummary>,
    pub liquid: Option<PicardStats>,
    pub solid: Option<PicardStats>,
    pub bc: Option<BcResiduals>,
    pub ode: Option<[OdeResidual; 2]>,
    pub kernel_bounds: Vec<BoundCheck>,
    pub oracle: Option<OracleComparison>,
    pub warnings: Vec<String>,
    pub notes: Vec<String>,
    /// Wall time; printed in the human part only.
    pub seconds: f64,
}

impl SolveReport {
    pub fn new(params: &PhysicalParams) -> Self {
        SolveReport {
            params: *params,
            ignition: false,
            front: None,
            p_star: None,
            bounds: None,
            hypotheses: HypothesisReport::default(),
            windows: None,
            xi: None,
            liquid: None,
            solid: None,
            bc: None,
            ode: None,
            kernel_bounds: Vec::new(),
            oracle: None,
            warnings: Vec::new(),
            notes: Vec::new(),
            seconds: 0.0,
        }
    }

    /// First static check that should stop a solve, as `(tag, detail)`.
    pub fn blocking_failure(&self) -> Option<(String, String)> {
        if !self.ignition {
            return Some(("ignition".into(), "arc power below the ignition threshold".into()));
        }
        for c in &self.hypotheses.checks {
            if let CheckStatus::Fail { at, excess } = c.status {
                return Some((c.tag.into(), format!("violated at {at:e} by {excess:e}")));
            }
        }
        let Some(w) = &self.windows else {
            return Some(("windows".into(), "contraction windows could not be computed".into()));
        };
        if !w.nonempty() {
            return Some(("windows".into(), format!("empty search window (alpha0 = {}, end = {})", w.alpha0, w.search_end)));
        }
        if !w.lower_condition {
            return Some(("lower_existence_condition".into(), "Z2(alpha0) < M alpha0^3".into()));
        }
        if !w.upper_condition {
            return Some(("upper_existence_condition".into(), format!("Z1 > M xi^3 at xi = {}", w.search_end)));
        }
        None
    }

    pub fn fill_solve(&mut self, xi: &XiSolveResult, bc: BcResiduals, ode: [OdeResidual; 2], lemma: Vec<BoundCheck>) {
        let ev = &xi.at_root;
        self.xi = Some(XiSummary {
            xi_star: xi.xi_star,
            z_residual: xi.z_residual,
            bracket: xi.bracket,
            refine_iterations: xi.iterations,
            sign_changes: xi.sign_changes.len(),
            bound_violations: xi.bound_violations.len(),
            scan_failures: xi.scan.iter().filter(|p| p.error.is_some()).count(),
        });
        self.liquid = Some(PicardStats {
            iterations: ev.liquid.iterations,
            final_update: ev.liquid.final_update_norm,
            max_ratio: ev.liquid.max_ratio(),
            epsilon: ev.epsilon1,
        });
        self.solid = Some(PicardStats {
            iterations: ev.solid.iterations,
            final_update: ev.solid.final_update_norm,
            max_ratio: ev.solid.max_ratio(),
            epsilon: ev.epsilon2,
        });
        self.bc = Some(bc);
        self.ode = Some(ode);
        self.kernel_bounds = lemma;
        self.warnings.extend(ev.warnings.iter().cloned());
        if let Some(p) = xi.scan.iter().find(|p| p.error.is_some()) {
            self.warnings.push(format!(
                "inner solves failed at {} scan point(s), first at xi = {}: {}",
                xi.scan.iter().filter(|p| p.error.is_some()).count(),
                p.xi,
                p.error.as_deref().unwrap_or("")
            ));
        }
        if !xi.bound_violations.is_empty() {
            self.warnings.push(format!(
                "Z left [Z2, Z1] at {} scan point(s)",
                xi.bound_violations.len()
            ));
        }
    }

    /// `tag = value` lines, in a fixed order and without timings.
    pub fn machine_lines(&self) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = Vec::new();
        let mut put = |k: &str, v: String| out.push((k.to_string(), v));
        let num = |x: f64| format!("{x:.12e}");
        let opt = |x: Option<f64>| x.map(num).unwrap_or_else(|| "none".into());
        put("ignition", self.ignition.to_string());
        put("alpha0", opt(self.front.map(|f| f.alpha0)));
        put("p_star", opt(self.p_star));
        put("stefan_number", num(self.params.stefan_m()));
        for c in &self.hypotheses.checks {
            let v = match c.status {
                CheckStatus::Pass => "pass".to_string(),
                CheckStatus::PerIterate => "per_iterate".to_string(),
                CheckStatus::Fail { at, excess } => format!("fail at={} excess={}", num(at), num(excess)),
            };
            put(&format!("hypothesis.{}", c.tag), v);
        }
        if let Some(w) = &self.windows {
            put("window.xi_bar1", num(w.xi_bar1));
            put("window.xi_bar2", num(w.xi_bar2));
            put("window.xi_hat", num(w.xi_hat));
            put("window.search_end", num(w.search_end));
            put("window.solid_nonempty", w.solid_window_nonempty.to_string());
            put("window.upper_condition", w.upper_condition.to_string());
            put("window.lower_condition", w.lower_condition.to_string());
            put("window.lower_condition_as_displayed", w.lower_condition_as_displayed.to_string());
        }
        if let Some(x) = &self.xi {
            put("xi_star", num(x.xi_star));
            put("xi.z_residual", num(x.z_residual));
            put("xi.bracket", format!("{} {}", num(x.bracket.0), num(x.bracket.1)));
            put("xi.refine_iterations", x.refine_iterations.to_string());
            put("xi.sign_changes", x.sign_changes.to_string());
            put("xi.bound_violations", x.bound_violations.to_string());
            put("xi.scan_failures", x.scan_failures.to_string());
        }
        for (name, s) in [("liquid", &self.liquid), ("solid", &self.solid)] {
            if let Some(s) = s {
                put(&format!("picard.{name}.iterations"), s.iterations.to_string());
                put(&format!("picard.{name}.final_update"), num(s.final_update));
                put(&format!("picard.{name}.max_ratio"), opt(s.max_ratio));
                put(&format!("picard.{name}.epsilon"), num(s.epsilon));
                put(&format!("picard.{name}.certified"), s.certified().to_string());
            }
        }
        if let Some(b) = &self.bc {
            put("bc.boiling_flux", num(b.boiling_flux));
            put("bc.liquid_melt", num(b.liquid_melt));
            put("bc.solid_melt", num(b.solid_melt));
            put("bc.stefan", num(b.stefan));
            put("bc.far_field", num(b.far_field));
        }
        if let Some([l, s]) = &self.ode {
            put("ode.liquid", num(l.max_normalized));
            put("ode.solid", num(s.max_normalized));
        }
        for c in &self.kernel_bounds {
            put(&format!("kernel_bound.{}", c.tag), format!("{}/{}", c.violations, c.points));
        }
        if let Some(o) = &self.oracle {
            put("oracle.liquid", num(o.liquid));
            put("oracle.solid", num(o.solid));
        }
        put("warnings", self.warnings.len().to_string());
        out
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "Stefan similarity solve");
        let _ = writeln!(s, "  ignition condition: {}", if self.ignition { "satisfied" } else { "VIOLATED" });
        if let (Some(f), Some(p)) = (self.front, self.p_star) {
            let _ = writeln!(s, "  boiling front alpha0 = {:.10}, P* = {:.6}", f.alpha0, p);
        }
        if !self.hypotheses.checks.is_empty() {
            let failed: Vec<_> = self
                .hypotheses
                .checks
                .iter()
                .filter(|c| matches!(c.status, CheckStatus::Fail { .. }))
                .map(|c| c.tag)
                .collect();
            if failed.is_empty() {
                let _ = writeln!(s, "  hypotheses: {} checked, none failed", self.hypotheses.checks.len());
            } else {
                let _ = writeln!(s, "  hypotheses FAILED: {}", failed.join(", "));
            }
        }
        if let Some(w) = &self.windows {
            let _ = writeln!(
                s,
                "  search window (alpha0, {:.8}], existence conditions: upper {}, lower {}",
                w.search_end, w.upper_condition, w.lower_condition
            );
        }
        if let Some(x) = &self.xi {
            let _ = writeln!(s, "  melt front xi* = {:.12} (|F| = {:.2e})", x.xi_star, x.z_residual);
        }
        if let (Some(l), Some(so)) = (&self.liquid, &self.solid) {
            let _ = writeln!(
                s,
                "  Picard: liquid {} it (eps {:.3}), solid {} it (eps {:.3})",
                l.iterations, l.epsilon, so.iterations, so.epsilon
            );
        }
        if let Some(b) = &self.bc {
            let _ = writeln!(s, "  max boundary residual {:.2e}", b.max());
        }
        if let Some([l, so]) = &self.ode {
            let _ = writeln!(s, "  ODE residual: liquid {:.2e}, solid {:.2e}", l.max_normalized, so.max_normalized);
        }
        if let Some(o) = &self.oracle {
            let _ = writeln!(s, "  shooting oracle distance: liquid {:.2e}, solid {:.2e}", o.liquid, o.solid);
        }
        for w in &self.warnings {
            let _ = writeln!(s, "  warning: {w}");
        }
        for n in &self.notes {
            let _ = writeln!(s, "  note: {n}");
        }
        let _ = writeln!(s, "  wall time {:.3} s", self.seconds);
        let _ = writeln!(s, "\n[results]");
        for (k, v) in self.machine_lines() {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }
}
