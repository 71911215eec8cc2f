//! Temperature-dependent material laws and the constants that bound them.

use crate::error::{Error, Result};
use crate::profile::SimilarityProfile;

/// One material law `f(θ)`.
#[derive(Debug, Clone, PartialEq)]
pub enum CoefficientFamily {
    Constant(f64),
    /// `intercept + slope·θ`
    Affine { intercept: f64, slope: f64 },
    /// `scale·exp(rate·θ)`
    Exponential { scale: f64, rate: f64 },
    /// `scale·θ^exponent`, for sources that vanish at zero temperature.
    /// Negative round-off temperatures are clamped to zero.
    Power { scale: f64, exponent: f64 },
    /// Piecewise-linear through `(θ, value)` nodes, strictly increasing in θ.
    Tabulated(Vec<(f64, f64)>),
}

impl CoefficientFamily {
    pub fn tabulated(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidParameter("tabulated family needs at least two points".into()));
        }
        if points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::InvalidParameter("tabulated nodes must be strictly increasing in theta".into()));
        }
        if points.iter().any(|p| !p.0.is_finite() || !p.1.is_finite()) {
            return Err(Error::InvalidParameter("tabulated nodes must be finite".into()));
        }
        Ok(CoefficientFamily::Tabulated(points))
    }

    pub fn eval(&self, theta: f64) -> Result<f64> {
        let v = match self {
            CoefficientFamily::Constant(c) => *c,
            CoefficientFamily::Affine { intercept, slope } => intercept + slope * theta,
            CoefficientFamily::Exponential { scale, rate } => scale * (rate * theta).exp(),
            CoefficientFamily::Power { scale, exponent } => scale * theta.max(0.0).powf(*exponent),
            CoefficientFamily::Tabulated(pts) => {
                let (lo, hi) = (pts[0].0, pts[pts.len() - 1].0);
                // round-off just past an end node is clamped, not rejected
                let slack = 1e-9 * (hi - lo).max(f64::MIN_POSITIVE);
                if !(theta >= lo - slack && theta <= hi + slack) {
                    return Err(Error::Range { value: theta, lo, hi });
                }
                let theta = theta.clamp(lo, hi);
                let i = pts.partition_point(|p| p.0 <= theta).clamp(1, pts.len() - 1);
                let (t0, v0) = pts[i - 1];
                let (t1, v1) = pts[i];
                v0 + (v1 - v0) * (theta - t0) / (t1 - t0)
            }
        };
        if !v.is_finite() {
            return Err(Error::Evaluation {
                what: format!("{self:?} at theta = {theta}"),
                value: v,
            });
        }
        Ok(v)
    }

    /// Temperatures where the law has a kink; sampled explicitly when
    /// estimating Lipschitz constants.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            CoefficientFamily::Tabulated(pts) => pts.iter().map(|p| p.0).collect(),
            _ => Vec::new(),
        }
    }

    /// Multiplies the law by a positive factor.
    pub fn scaled(&self, t: f64) -> Self {
        match self {
            CoefficientFamily::Constant(c) => CoefficientFamily::Constant(c * t),
            CoefficientFamily::Affine { intercept, slope } => CoefficientFamily::Affine {
                intercept: intercept * t,
                slope: slope * t,
            },
            CoefficientFamily::Exponential { scale, rate } => CoefficientFamily::Exponential {
                scale: scale * t,
                rate: *rate,
            },
            CoefficientFamily::Power { scale, exponent } => CoefficientFamily::Power {
                scale: scale * t,
                exponent: *exponent,
            },
            CoefficientFamily::Tabulated(pts) => {
                CoefficientFamily::Tabulated(pts.iter().map(|&(th, v)| (th, v * t)).collect())
            }
        }
    }

    pub fn is_identically_zero(&self) -> bool {
        match self {
            CoefficientFamily::Constant(c) => *c == 0.0,
            CoefficientFamily::Affine { intercept, slope } => *intercept == 0.0 && *slope == 0.0,
            CoefficientFamily::Exponential { scale, .. } | CoefficientFamily::Power { scale, .. } => *scale == 0.0,
            CoefficientFamily::Tabulated(pts) => pts.iter().all(|p| p.1 == 0.0),
        }
    }
}

/// Liquid (between the boiling and melting fronts) or solid (beyond the
/// melting front).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Liquid,
    Solid,
}

impl Phase {
    pub fn index(self) -> usize {
        match self {
            Phase::Liquid => 1,
            Phase::Solid => 2,
        }
    }
}

/// Dimensionless coefficients at one temperature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Starred {
    /// `N* = c·γ`
    pub n: f64,
    /// `L* = λ`
    pub l: f64,
    /// `K* = ρ/θ_m`
    pub k: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseLaws {
    pub c: CoefficientFamily,
    pub gamma: CoefficientFamily,
    pub lambda: CoefficientFamily,
    pub rho: CoefficientFamily,
}

impl PhaseLaws {
    pub fn constant(c: f64, gamma: f64, lambda: f64, rho: f64) -> Self {
        Self {
            c: CoefficientFamily::Constant(c),
            gamma: CoefficientFamily::Constant(gamma),
            lambda: CoefficientFamily::Constant(lambda),
            rho: CoefficientFamily::Constant(rho),
        }
    }
}

/// The eight material laws of both phases plus the melting temperature used
/// to nondimensionalise them.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSet {
    pub liquid: PhaseLaws,
    pub solid: PhaseLaws,
    pub theta_m: f64,
}

impl CoefficientSet {
    /// All laws constant: `N* = nl`, `L* = l`, `K* = k` in both phases.
    pub fn uniform(n: f64, l: f64, k: f64, theta_m: f64) -> Self {
        let laws = PhaseLaws::constant(n, 1.0, l, k * theta_m);
        Self {
            liquid: laws.clone(),
            solid: laws,
            theta_m,
        }
    }

    pub fn laws(&self, phase: Phase) -> &PhaseLaws {
        match phase {
            Phase::Liquid => &self.liquid,
            Phase::Solid => &self.solid,
        }
    }

    pub fn laws_mut(&mut self, phase: Phase) -> &mut PhaseLaws {
        match phase {
            Phase::Liquid => &mut self.liquid,
            Phase::Solid => &mut self.solid,
        }
    }

    /// Starred coefficients at dimensionless temperature `u`, i.e. at
    /// `θ = θ_m(u + 1)`.
    pub fn starred(&self, phase: Phase, u: f64) -> Result<Starred> {
        let laws = self.laws(phase);
        let theta = self.theta_m * (u + 1.0);
        Ok(Starred {
            n: laws.c.eval(theta)? * laws.gamma.eval(theta)?,
            l: laws.lambda.eval(theta)?,
            k: laws.rho.eval(theta)? / self.theta_m,
        })
    }

    /// Checks that heat capacity, density and conductivity are strictly
    /// positive and the Joule coefficient nonnegative over a `u`-range.
    pub fn validate_on(&self, phase: Phase, range: (f64, f64), samples: usize) -> Result<()> {
        for u in sample_points(self, phase, range, samples) {
            let theta = self.theta_m * (u + 1.0);
            let laws = self.laws(phase);
            for (name, fam, strict) in [
                ("c", &laws.c, true),
                ("gamma", &laws.gamma, true),
                ("lambda", &laws.lambda, true),
                ("rho", &laws.rho, false),
            ] {
                let v = fam.eval(theta)?;
                if (strict && !(v > 0.0)) || (!strict && v < 0.0) {
                    return Err(Error::Evaluation {
                        what: format!("{name}{} at theta = {theta}", phase.index()),
                        value: v,
                    });
                }
            }
        }
        Ok(())
    }
}

/// Dimensionless temperature ranges over which each phase is sampled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseRanges {
    pub liquid: (f64, f64),
    pub solid: (f64, f64),
}

impl PhaseRanges {
    /// Liquid between melting and boiling, solid between zero temperature
    /// and melting.
    pub fn physical(theta_m: f64, theta_b: f64) -> Self {
        Self {
            liquid: (0.0, theta_b / theta_m - 1.0),
            solid: (-1.0, 0.0),
        }
    }

    pub fn get(&self, phase: Phase) -> (f64, f64) {
        match phase {
            Phase::Liquid => self.liquid,
            Phase::Solid => self.solid,
        }
    }
}

/// Hypothesis constants: two-sided bounds shared by both phases, the solid
/// decay rate `R` and per-phase Lipschitz constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientBounds {
    pub l_min: f64,
    pub l_max: f64,
    pub n_min: f64,
    pub n_max: f64,
    pub k_min: f64,
    pub k_max: f64,
    pub decay_rate: f64,
    pub n_lip: [f64; 2],
    pub l_lip: [f64; 2],
    pub k_lip: [f64; 2],
}

impl CoefficientBounds {
    /// Bounds that exactly describe constant coefficients `N*, L*, K*`.
    pub fn for_constants(n: f64, l: f64, k: f64, a: f64) -> Self {
        Self {
            l_min: l,
            l_max: l,
            n_min: n,
            n_max: n,
            k_min: k,
            k_max: k,
            decay_rate: a * a * n / l,
            n_lip: [0.0; 2],
            l_lip: [0.0; 2],
            k_lip: [0.0; 2],
        }
    }

    pub fn n_lip(&self, phase: Phase) -> f64 {
        self.n_lip[phase.index() - 1]
    }
    pub fn l_lip(&self, phase: Phase) -> f64 {
        self.l_lip[phase.index() - 1]
    }
    pub fn k_lip(&self, phase: Phase) -> f64 {
        self.k_lip[phase.index() - 1]
    }

    /// `a²N_M/L_m`, the smallest admissible solid decay rate.
    pub fn min_decay_rate(&self, a: f64) -> f64 {
        a * a * self.n_max / self.l_min
    }

    /// The Lipschitz combination `Ñ/L_m + N_M·L̃/L_m²` shared by the
    /// liquid kernel estimates.
    pub fn liquid_ratio_lip(&self) -> f64 {
        self.n_lip[0] / self.l_min + self.n_max * self.l_lip[0] / (self.l_min * self.l_min)
    }

    /// `L_M·Ñ₂ + N_M·L̃₂`, the solid counterpart (before dividing by `L_m²`).
    pub fn solid_ratio_lip(&self) -> f64 {
        self.l_max * self.n_lip[1] + self.n_max * self.l_lip[1]
    }

    pub fn validate(&self, a: f64) -> Result<()> {
        let ok = self.l_min > 0.0
            && self.l_min <= self.l_max
            && self.n_min > 0.0
            && self.n_min <= self.n_max
            && self.k_min >= 0.0
            && self.k_min <= self.k_max
            && self.n_lip.iter().chain(&self.l_lip).chain(&self.k_lip).all(|v| *v >= 0.0 && v.is_finite());
        if !ok {
            return Err(Error::InvalidParameter(format!("inconsistent coefficient bounds {self:?}")));
        }
        let r_min = self.min_decay_rate(a);
        if self.decay_rate < r_min * (1.0 - 1e-12) {
            return Err(Error::InvalidParameter(format!(
                "decay rate R = {} below a^2 N_M / L_m = {r_min}",
                self.decay_rate
            )));
        }
        Ok(())
    }
}

fn sample_points(set: &CoefficientSet, phase: Phase, range: (f64, f64), samples: usize) -> Vec<f64> {
    let (lo, hi) = range;
    let n = samples.max(2);
    let mut pts: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
    let laws = set.laws(phase);
    for fam in [&laws.c, &laws.gamma, &laws.lambda, &laws.rho] {
        for th in fam.breakpoints() {
            let u = th / set.theta_m - 1.0;
            if u > lo && u < hi {
                pts.push(u);
            }
        }
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// Multiple of the minimal decay rate used when nothing decays.
pub const FREE_DECAY_FACTOR: f64 = 100.0;

/// Empirical bounds and Lipschitz constants of the starred coefficients.
///
/// Lipschitz constants are the largest difference quotient between adjacent
/// samples (kinks of tabulated laws are always sampled) multiplied by
/// `safety`. `R` is set to its smallest admissible value `a²N_M/L_m`, or to
/// [`FREE_DECAY_FACTOR`] times that when the solid Joule coefficient
/// vanishes identically (the decay conditions then hold for every `R`).
pub fn estimate_bounds(
    set: &CoefficientSet,
    ranges: &PhaseRanges,
    a: f64,
    samples: usize,
    safety: f64,
) -> Result<CoefficientBounds> {
    if samples < 2 {
        return Err(Error::InvalidParameter("estimate_bounds needs at least two samples".into()));
    }
    for phase in [Phase::Liquid, Phase::Solid] {
        let (lo, hi) = ranges.get(phase);
        if !(hi > lo) {
            return Err(Error::InvalidParameter(format!(
                "degenerate u-range [{lo}, {hi}] for phase {}",
                phase.index()
            )));
        }
    }

    let mut b = CoefficientBounds {
        l_min: f64::INFINITY,
        l_max: f64::NEG_INFINITY,
        n_min: f64::INFINITY,
        n_max: f64::NEG_INFINITY,
        k_min: f64::INFINITY,
        k_max: 0.0,
        decay_rate: 0.0,
        n_lip: [0.0; 2],
        l_lip: [0.0; 2],
        k_lip: [0.0; 2],
    };

    for phase in [Phase::Liquid, Phase::Solid] {
        let pts = sample_points(set, phase, ranges.get(phase), samples);
        let vals = pts
            .iter()
            .map(|&u| set.starred(phase, u))
            .collect::<Result<Vec<_>>>()?;
        for s in &vals {
            if !(s.n.is_finite() && s.l.is_finite() && s.k.is_finite()) {
                return Err(Error::Evaluation {
                    what: format!("starred coefficients of phase {}", phase.index()),
                    value: f64::NAN,
                });
            }
            b.l_min = b.l_min.min(s.l);
            b.l_max = b.l_max.max(s.l);
            b.n_min = b.n_min.min(s.n);
            b.n_max = b.n_max.max(s.n);
            b.k_max = b.k_max.max(s.k);
            if phase == Phase::Liquid {
                b.k_min = b.k_min.min(s.k);
            }
        }
        let i = phase.index() - 1;
        for (w, s) in pts.windows(2).zip(vals.windows(2)) {
            let du = w[1] - w[0];
            b.n_lip[i] = b.n_lip[i].max((s[1].n - s[0].n).abs() / du);
            b.l_lip[i] = b.l_lip[i].max((s[1].l - s[0].l).abs() / du);
            b.k_lip[i] = b.k_lip[i].max((s[1].k - s[0].k).abs() / du);
        }
        b.n_lip[i] *= safety;
        b.l_lip[i] *= safety;
        b.k_lip[i] *= safety;
    }
    b.k_min = b.k_min.max(0.0);
    b.decay_rate = b.min_decay_rate(a);
    if set.solid.rho.is_identically_zero() {
        b.decay_rate *= FREE_DECAY_FACTOR;
    }
    Ok(b)
}

/// Outcome of one inequality check.
#[derive(Debug, Clone, PartialEq)]
pub enum CheckStatus {
    Pass,
    /// Violated; `at` is the worst sampled location (a `u` value or a
    /// similarity coordinate `s`) and `excess` how far past the bound it is.
    Fail { at: f64, excess: f64 },
    /// Couples coefficients with the unknown solid profile; verified on
    /// every iterate during the solve instead.
    PerIterate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisCheck {
    pub tag: &'static str,
    pub status: CheckStatus,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct HypothesisReport {
    pub checks: Vec<HypothesisCheck>,
}

impl HypothesisReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.status == CheckStatus::Pass)
    }

    pub fn no_failures(&self) -> bool {
        self.checks.iter().all(|c| !matches!(c.status, CheckStatus::Fail { .. }))
    }

    pub fn get(&self, tag: &str) -> Option<&CheckStatus> {
        self.checks.iter().find(|c| c.tag == tag).map(|c| &c.status)
    }
}

pub mod tags {
    pub const DECAY_RATE: &str = "decay_rate_admissible";
    pub const L_BOUNDS: [&str; 2] = ["conductivity_bounds_liquid", "conductivity_bounds_solid"];
    pub const L_LIP: [&str; 2] = ["conductivity_lipschitz_liquid", "conductivity_lipschitz_solid"];
    pub const N_BOUNDS: [&str; 2] = ["capacity_bounds_liquid", "capacity_bounds_solid"];
    pub const N_LIP: [&str; 2] = ["capacity_lipschitz_liquid", "capacity_lipschitz_solid"];
    pub const K_BOUNDS_LIQUID: &str = "joule_bounds_liquid";
    pub const K_DECAY_SOLID: &str = "joule_decay_solid";
    pub const K_LIP_LIQUID: &str = "joule_lipschitz_liquid";
    pub const K_LIP_DECAY_SOLID: &str = "joule_lipschitz_decay_solid";
}

const SLACK: f64 = 1e-12;

fn worst<I: Iterator<Item = (f64, f64)>>(pairs: I) -> CheckStatus {
    // pairs of (location, excess); positive excess is a violation
    let mut worst: Option<(f64, f64)> = None;
    for (at, excess) in pairs {
        if excess > 0.0 && worst.is_none_or(|w| excess > w.1) {
            worst = Some((at, excess));
        }
    }
    match worst {
        None => CheckStatus::Pass,
        Some((at, excess)) => CheckStatus::Fail { at, excess },
    }
}

/// Verifies the coefficient hypotheses against declared bounds on sampled
/// `u` values. The solid decay conditions are checked pointwise on `u2`
/// when given; otherwise they are marked per-iterate (or pass trivially when
/// the solid Joule coefficient vanishes).
pub fn check_hypotheses(
    bounds: &CoefficientBounds,
    set: &CoefficientSet,
    ranges: &PhaseRanges,
    a: f64,
    samples: usize,
    u2: Option<&SimilarityProfile>,
) -> Result<HypothesisReport> {
    let mut checks = Vec::new();
    let r_min = bounds.min_decay_rate(a);
    checks.push(HypothesisCheck {
        tag: tags::DECAY_RATE,
        status: if bounds.decay_rate >= r_min * (1.0 - SLACK) {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail {
                at: bounds.decay_rate,
                excess: r_min - bounds.decay_rate,
            }
        },
    });

    for phase in [Phase::Liquid, Phase::Solid] {
        let i = phase.index() - 1;
        let pts = sample_points(set, phase, ranges.get(phase), samples);
        let vals = pts
            .iter()
            .map(|&u| set.starred(phase, u))
            .collect::<Result<Vec<_>>>()?;
        let two_sided = |f: fn(&Starred) -> f64, lo: f64, hi: f64| {
            worst(pts.iter().zip(&vals).map(|(&u, s)| {
                let v = f(s);
                (u, (lo - v).max(v - hi) - SLACK * hi.abs())
            }))
        };
        let lipschitz = |f: fn(&Starred) -> f64, lip: f64| {
            worst(pts.windows(2).zip(vals.windows(2)).map(|(w, s)| {
                let du = w[1] - w[0];
                (w[0], (f(&s[1]) - f(&s[0])).abs() - lip * du * (1.0 + SLACK) - 1e-300)
            }))
        };
        checks.push(HypothesisCheck {
            tag: tags::L_BOUNDS[i],
            status: two_sided(|s| s.l, bounds.l_min, bounds.l_max),
        });
        checks.push(HypothesisCheck {
            tag: tags::L_LIP[i],
            status: lipschitz(|s| s.l, bounds.l_lip[i]),
        });
        checks.push(HypothesisCheck {
            tag: tags::N_BOUNDS[i],
            status: two_sided(|s| s.n, bounds.n_min, bounds.n_max),
        });
        checks.push(HypothesisCheck {
            tag: tags::N_LIP[i],
            status: lipschitz(|s| s.n, bounds.n_lip[i]),
        });
        match phase {
            Phase::Liquid => {
                checks.push(HypothesisCheck {
                    tag: tags::K_BOUNDS_LIQUID,
                    status: two_sided(|s| s.k, bounds.k_min, bounds.k_max),
                });
                checks.push(HypothesisCheck {
                    tag: tags::K_LIP_LIQUID,
                    status: lipschitz(|s| s.k, bounds.k_lip[0]),
                });
            }
            Phase::Solid => {
                let (decay, lip_decay) = if set.solid.rho.is_identically_zero() {
                    (CheckStatus::Pass, CheckStatus::Pass)
                } else if let Some(p) = u2 {
                    (
                        solid_decay_status(bounds, set, p)?,
                        solid_lipschitz_decay_status(bounds, set, p, None)?,
                    )
                } else {
                    (CheckStatus::PerIterate, CheckStatus::PerIterate)
                };
                checks.push(HypothesisCheck {
                    tag: tags::K_DECAY_SOLID,
                    status: decay,
                });
                checks.push(HypothesisCheck {
                    tag: tags::K_LIP_DECAY_SOLID,
                    status: lip_decay,
                });
            }
        }
    }
    Ok(HypothesisReport { checks })
}

/// `K₂*(u₂(s)) ≤ K_M·exp(−R s²)` at every node of `u2`.
pub fn solid_decay_status(bounds: &CoefficientBounds, set: &CoefficientSet, u2: &SimilarityProfile) -> Result<CheckStatus> {
    let mut pairs = Vec::with_capacity(u2.len());
    for (&s, &u) in u2.nodes().iter().zip(u2.values()) {
        let k = set.starred(Phase::Solid, u)?.k;
        let bound = bounds.k_max * (-bounds.decay_rate * s * s).exp();
        pairs.push((s, k - bound * (1.0 + SLACK) - 1e-300));
    }
    Ok(worst(pairs.into_iter()))
}

/// `|K₂*(u₂(s)) − K₂*(u₂*(s))| ≤ K̃₂·exp(−R s²)·‖u₂ − u₂*‖`. Without a
/// second profile, `u₂*` is `u₂` shifted by a small step, which probes the
/// local slope of `K₂*` along the profile.
pub fn solid_lipschitz_decay_status(
    bounds: &CoefficientBounds,
    set: &CoefficientSet,
    u2: &SimilarityProfile,
    other: Option<&SimilarityProfile>,
) -> Result<CheckStatus> {
    const STEP: f64 = 1e-6;
    let norm = match other {
        Some(o) => u2.values().iter().zip(o.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max),
        None => STEP,
    };
    let mut pairs = Vec::with_capacity(u2.len());
    for (i, (&s, &u)) in u2.nodes().iter().zip(u2.values()).enumerate() {
        let v = match other {
            Some(o) => o.values()[i],
            None => u - STEP,
        };
        let dk = (set.starred(Phase::Solid, u)?.k - set.starred(Phase::Solid, v)?.k).abs();
        let bound = bounds.k_lip[1] * (-bounds.decay_rate * s * s).exp() * norm;
        pairs.push((s, dk - bound * (1.0 + 1e-9) - 1e-300));
    }
    Ok(worst(pairs.into_iter()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::Domain;

    fn set_with_liquid_lambda(f: CoefficientFamily) -> CoefficientSet {
        let mut s = CoefficientSet::uniform(1.0, 1.0, 0.0, 1.0);
        s.liquid.lambda = f;
        s
    }

    #[test]
    fn eval_examples() {
        assert_eq!(CoefficientFamily::Constant(5.0).eval(300.0).unwrap(), 5.0);
        let aff = CoefficientFamily::Affine { intercept: 2.0, slope: 0.01 };
        assert!((aff.eval(100.0).unwrap() - 3.0).abs() < 1e-15);
        let tab = CoefficientFamily::tabulated(vec![(0.0, 1.0), (10.0, 3.0)]).unwrap();
        assert_eq!(tab.eval(5.0).unwrap(), 2.0);
        assert_eq!(tab.eval(10.0).unwrap(), 3.0);
        assert!(matches!(tab.eval(10.5), Err(Error::Range { .. })));
        assert!(CoefficientFamily::tabulated(vec![(1.0, 1.0), (1.0, 2.0)]).is_err());
        let p = CoefficientFamily::Power { scale: 2.0, exponent: 3.0 };
        assert_eq!(p.eval(2.0).unwrap(), 16.0);
        assert_eq!(p.eval(-1e-18).unwrap(), 0.0);
        let bad = CoefficientFamily::Exponential { scale: 1.0, rate: 1000.0 };
        assert!(matches!(bad.eval(10.0), Err(Error::Evaluation { .. })));
    }

    #[test]
    fn starred_examples() {
        let s = CoefficientSet::uniform(1.0, 1.0, 1.0, 1.0);
        let st = s.starred(Phase::Liquid, 0.0).unwrap();
        assert_eq!((st.n, st.l, st.k), (1.0, 1.0, 1.0));

        let mut s = CoefficientSet::uniform(1.0, 1.0, 0.0, 2.0);
        s.liquid.c = CoefficientFamily::Constant(2.0);
        s.liquid.gamma = CoefficientFamily::Constant(3.0);
        s.liquid.rho = CoefficientFamily::Constant(4.0);
        let st = s.starred(Phase::Liquid, 0.37).unwrap();
        assert_eq!(st.n, 6.0);
        assert_eq!(st.k, 2.0);
    }

    #[test]
    fn starred_scales_linearly_with_conductivity() {
        let base = set_with_liquid_lambda(CoefficientFamily::Exponential { scale: 1.3, rate: 0.4 });
        let mut scaled = base.clone();
        scaled.liquid.lambda = base.liquid.lambda.scaled(2.5);
        for u in [0.0, 0.3, 0.9] {
            let a = base.starred(Phase::Liquid, u).unwrap().l;
            let b = scaled.starred(Phase::Liquid, u).unwrap().l;
            assert!((b - 2.5 * a).abs() < 1e-14 * b);
        }
    }

    #[test]
    fn bounds_of_constants() {
        let s = CoefficientSet::uniform(1.0, 1.0, 1.0, 1.0);
        let ranges = PhaseRanges { liquid: (0.0, 1.0), solid: (-1.0, 0.0) };
        let b = estimate_bounds(&s, &ranges, 1.0, 50, 1.1).unwrap();
        assert_eq!((b.l_min, b.l_max, b.n_min, b.n_max, b.k_min, b.k_max), (1.0, 1.0, 1.0, 1.0, 1.0, 1.0));
        assert_eq!(b.n_lip, [0.0; 2]);
        assert_eq!(b.l_lip, [0.0; 2]);
        assert_eq!(b.k_lip, [0.0; 2]);
        assert_eq!(b.decay_rate, 1.0);
    }

    #[test]
    fn bounds_of_affine_conductivity() {
        // L*(u) = 1 + u with theta_m = 1: lambda(theta) = theta.
        let s = set_with_liquid_lambda(CoefficientFamily::Affine { intercept: 0.0, slope: 1.0 });
        let ranges = PhaseRanges { liquid: (0.0, 1.0), solid: (-0.5, 0.0) };
        let b = estimate_bounds(&s, &ranges, 1.0, 101, 1.0).unwrap();
        // The solid phase keeps lambda = 1 constant.
        assert_eq!(b.l_min, 1.0);
        assert!((b.l_max - 2.0).abs() < 1e-14);
        assert!((b.l_lip[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bounds_of_exponential_conductivity() {
        // L*(u) = exp(u) on [0,1]: lambda(theta) = exp(theta - 1).
        let s = set_with_liquid_lambda(CoefficientFamily::Exponential { scale: (-1f64).exp(), rate: 1.0 });
        let ranges = PhaseRanges { liquid: (0.0, 1.0), solid: (-0.5, 0.0) };
        let b = estimate_bounds(&s, &ranges, 1.0, 10_001, 1.1).unwrap();
        // Oracle: the sup of the derivative e^u on [0,1] is e.
        let exact = std::f64::consts::E * 1.1;
        assert!((b.l_lip[0] - exact).abs() < 1e-3, "{}", b.l_lip[0]);
        assert!((b.l_lip[0] - 2.989).abs() < 2e-3);
    }

    #[test]
    fn tabulated_kinks_are_sampled() {
        let tab = CoefficientFamily::tabulated(vec![(1.0, 1.0), (1.001, 2.0), (2.0, 2.0)]).unwrap();
        let s = set_with_liquid_lambda(tab);
        let ranges = PhaseRanges { liquid: (0.0, 1.0), solid: (-0.5, 0.0) };
        let b = estimate_bounds(&s, &ranges, 1.0, 3, 1.0).unwrap();
        assert!((b.l_lip[0] - 1000.0).abs() < 1e-6);
    }

    #[test]
    fn estimated_bounds_pass_their_own_check() {
        let mut s = CoefficientSet::uniform(1.0, 1.0, 0.5, 2.0);
        s.liquid.lambda = CoefficientFamily::Exponential { scale: 0.8, rate: 0.3 };
        s.liquid.c = CoefficientFamily::Affine { intercept: 1.0, slope: 0.2 };
        s.solid.lambda = CoefficientFamily::tabulated(vec![(0.0, 1.5), (1.0, 1.2), (2.0, 1.0)]).unwrap();
        s.solid.rho = CoefficientFamily::Constant(0.0);
        let ranges = PhaseRanges { liquid: (0.0, 1.5), solid: (-1.0, 0.0) };
        let b = estimate_bounds(&s, &ranges, 0.7, 200, 1.1).unwrap();
        let rep = check_hypotheses(&b, &s, &ranges, 0.7, 200, None).unwrap();
        assert!(rep.all_pass(), "{rep:?}");
    }

    #[test]
    fn understated_lipschitz_constant_fails() {
        let s = set_with_liquid_lambda(CoefficientFamily::Affine { intercept: 1.0, slope: 0.5 });
        let ranges = PhaseRanges { liquid: (0.0, 1.0), solid: (-1.0, 0.0) };
        let mut b = estimate_bounds(&s, &ranges, 1.0, 50, 1.1).unwrap();
        b.l_lip[0] = 0.4;
        let rep = check_hypotheses(&b, &s, &ranges, 1.0, 50, None).unwrap();
        assert!(matches!(rep.get(tags::L_LIP[0]), Some(CheckStatus::Fail { .. })));
        assert_eq!(rep.get(tags::L_BOUNDS[0]), Some(&CheckStatus::Pass));
    }

    #[test]
    fn solid_decay_conditions() {
        let nodes: Vec<f64> = (0..=40).map(|i| 1.0 + i as f64 * 0.1).collect();
        let values: Vec<f64> = nodes.iter().map(|&s| -(1.0 - 1.0 / s)).collect();
        let u2 = SimilarityProfile::new(nodes, values, Domain::Solid { xi: 1.0 }).unwrap();
        let ranges = PhaseRanges { liquid: (0.0, 1.0), solid: (-1.0, 0.0) };

        // Vanishing solid Joule coefficient: everything passes.
        let mut s = CoefficientSet::uniform(1.0, 1.0, 1.0, 1.0);
        s.solid.rho = CoefficientFamily::Constant(0.0);
        let b = estimate_bounds(&s, &ranges, 1.0, 20, 1.1).unwrap();
        assert!(check_hypotheses(&b, &s, &ranges, 1.0, 20, Some(&u2)).unwrap().all_pass());

        // Constant rho2 = 1 cannot decay like a Gaussian.
        let s = CoefficientSet::uniform(1.0, 1.0, 1.0, 1.0);
        let b = estimate_bounds(&s, &ranges, 1.0, 20, 1.1).unwrap();
        assert_eq!(b.decay_rate, 1.0);
        let rep = check_hypotheses(&b, &s, &ranges, 1.0, 20, Some(&u2)).unwrap();
        match rep.get(tags::K_DECAY_SOLID) {
            Some(CheckStatus::Fail { at, .. }) => assert!((-at * at).exp() < 1.0 / b.k_max),
            other => panic!("expected failure, got {other:?}"),
        }
        let rep = check_hypotheses(&b, &s, &ranges, 1.0, 20, None).unwrap();
        assert_eq!(rep.get(tags::K_DECAY_SOLID), Some(&CheckStatus::PerIterate));
    }
}
