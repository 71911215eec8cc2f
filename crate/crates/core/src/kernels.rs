//! Integral kernels of the reduced equations along a profile `u`.
//!
//! With `z` the lower end of the domain (`α₀` or `ξ`):
//!
//! * `g(η) = 2a² ∫_z^η v·N*/L* dv` and `E = exp(−g)`,
//! * `χ(η) = ∫_z^η E/(v²L*) dv`,
//! * `J(η) = E(η)·∫_z^η K*/(s²E(s)) ds`,
//! * `Φ(η) = C·∫_z^η J/(v²L*) dv` with `C = k²/(16a²π²)`.
//!
//! `J` is advanced panel by panel as
//! `J_{i+1} = e^{−(g_{i+1}−g_i)}·J_i + ∫ K*/s²·e^{−(g_{i+1}−g(s))} ds`,
//! so only ratios `E(v)/E(s) ≤ 1` are ever formed. Inside a panel `g` is the
//! cubic Hermite interpolant built from its exact derivative `g' = 2a²vN*/L*`;
//! the part of `Φ` sourced within the panel is a nested Gauss rule.

use std::cell::RefCell;

use crate::coefficients::{CoefficientSet, Phase, Starred};
use crate::error::{Error, Result};
use crate::joule_prefactor;
use crate::profile::{hermite, Domain, SimilarityProfile};
use crate::special::{gauss8, h_scaled, integrate, Limit, QuadratureSpec};
use crate::vapor::{PhysicalParams, VaporFront};

/// Kernel values on the nodes of a profile.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelTable {
    pub nodes: Vec<f64>,
    /// `−ln E`
    pub g: Vec<f64>,
    pub e: Vec<f64>,
    pub chi: Vec<f64>,
    pub j: Vec<f64>,
    pub phi: Vec<f64>,
    /// `L*(u(η))` at the nodes.
    pub l_star: Vec<f64>,
    /// `χ(∞)`, solid profiles only.
    pub chi_inf: Option<f64>,
    /// `Φ(∞)`, solid profiles only.
    pub phi_inf: Option<f64>,
}

impl KernelTable {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
    pub fn last(v: &[f64]) -> f64 {
        v[v.len() - 1]
    }
}

/// Collects the first coefficient error raised inside a quadrature closure.
struct Guard(RefCell<Option<Error>>);

impl Guard {
    fn new() -> Self {
        Guard(RefCell::new(None))
    }
    fn starred(&self, set: &CoefficientSet, phase: Phase, u: f64) -> Starred {
        match set.starred(phase, u) {
            Ok(s) => s,
            Err(e) => {
                self.0.borrow_mut().get_or_insert(e);
                Starred { n: 1.0, l: 1.0, k: 0.0 }
            }
        }
    }
    fn check(&self) -> Result<()> {
        match self.0.borrow_mut().take() {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }
}

fn phase_of(domain: Domain) -> Phase {
    match domain {
        Domain::Liquid { .. } => Phase::Liquid,
        Domain::Solid { .. } => Phase::Solid,
    }
}

/// Evaluates `E, χ, J, Φ` along `profile`; solid profiles also get the
/// tail-completed `χ(∞)` and `Φ(∞)` with `u` frozen beyond the last node.
pub fn compute_kernels(
    profile: &SimilarityProfile,
    set: &CoefficientSet,
    a: f64,
    k: f64,
    spec: &QuadratureSpec,
) -> Result<KernelTable> {
    let phase = phase_of(profile.domain());
    let nodes = profile.nodes().to_vec();
    let n = nodes.len();
    if !(nodes[0] > 0.0) {
        return Err(Error::Domain(format!("kernels need a positive lower limit, got {}", nodes[0])));
    }
    let c = joule_prefactor(k, a);
    let with_source = c > 0.0;
    let a2 = 2.0 * a * a;
    let guard = Guard::new();

    let st: Vec<Starred> = profile
        .values()
        .iter()
        .map(|&u| set.starred(phase, u))
        .collect::<Result<_>>()?;
    for (s, &x) in st.iter().zip(&nodes) {
        if !(s.l > 0.0 && s.n > 0.0 && s.k >= 0.0) {
            return Err(Error::Evaluation {
                what: format!("starred coefficients at eta = {x}"),
                value: s.l.min(s.n),
            });
        }
    }
    let gp: Vec<f64> = nodes.iter().zip(&st).map(|(&v, s)| a2 * v * s.n / s.l).collect();

    let mut g = vec![0.0; n];
    let mut chi = vec![0.0; n];
    let mut j = vec![0.0; n];
    let mut phi = vec![0.0; n];

    for i in 0..n - 1 {
        let (v0, v1) = (nodes[i], nodes[i + 1]);
        let coef = |v: f64| guard.starred(set, phase, profile.eval_in(i, v));

        let dg = integrate(
            |v| {
                let s = coef(v);
                a2 * v * s.n / s.l
            },
            v0,
            Limit::Finite(v1),
            spec,
        )?;
        guard.check()?;
        g[i + 1] = g[i] + dg;
        let (g0, g1, m0, m1) = (g[i], g[i + 1], gp[i], gp[i + 1]);
        // g(v) − g_i inside the panel
        let rise = |v: f64| hermite(v0, v1, 0.0, g1 - g0, m0, m1, v).0;

        let dchi = integrate(
            |v| {
                let s = coef(v);
                (-rise(v)).exp() / (v * v * s.l)
            },
            v0,
            Limit::Finite(v1),
            spec,
        )?;
        guard.check()?;
        chi[i + 1] = chi[i] + (-g0).exp() * dchi;

        if with_source {
            let src = integrate(
                |s| {
                    let cs = coef(s);
                    cs.k / (s * s) * (-(g1 - g0 - rise(s))).exp()
                },
                v0,
                Limit::Finite(v1),
                spec,
            )?;
            guard.check()?;
            j[i + 1] = (-(g1 - g0)).exp() * j[i] + src;
            // Source generated inside this panel, felt further along it.
            let nested = gauss8(
                |v| {
                    let rv = rise(v);
                    let inner = gauss8(
                        |s| {
                            let cs = coef(s);
                            cs.k / (s * s) * (-(rv - rise(s))).exp()
                        },
                        v0,
                        v,
                    );
                    inner / (v * v * coef(v).l)
                },
                v0,
                v1,
            );
            guard.check()?;
            phi[i + 1] = phi[i] + c * (j[i] * dchi + nested);
        }
    }

    let e: Vec<f64> = g.iter().map(|x| (-x).exp()).collect();
    let l_star = st.iter().map(|s| s.l).collect();

    let (chi_inf, phi_inf) = if phase == Phase::Solid {
        let eta = nodes[n - 1];
        let s = st[n - 1];
        let cdec = a * a * s.n / s.l;
        let e_max = e[n - 1];
        let tail = integrate(
            |v| (-cdec * (v - eta) * (v + eta)).exp() / (v * v),
            eta,
            Limit::Infinity,
            spec,
        )?;
        let chi_inf = chi[n - 1] + e_max / s.l * tail;
        let phi_inf = if with_source {
            // ∫_s^∞ e^{−c(v²−s²)}/v² dv in closed form
            let t = |z: f64| a * (s.n / s.l).sqrt() * h_scaled(Limit::Infinity, s.n, s.l, z, a).unwrap_or(0.0);
            let inner = if s.k > 0.0 {
                integrate(|z| t(z) / (z * z), eta, Limit::Infinity, spec)?
            } else {
                0.0
            };
            phi[n - 1] + c / s.l * (j[n - 1] * t(eta) + s.k * inner)
        } else {
            0.0
        };
        (Some(chi_inf), Some(phi_inf))
    } else {
        (None, None)
    };

    Ok(KernelTable {
        nodes,
        g,
        e,
        chi,
        j,
        phi,
        l_star,
        chi_inf,
        phi_inf,
    })
}

/// `E` at the nodes of `profile`.
pub fn kernel_e(profile: &SimilarityProfile, set: &CoefficientSet, a: f64, spec: &QuadratureSpec) -> Result<Vec<f64>> {
    Ok(compute_kernels(profile, set, a, 0.0, spec)?.e)
}

/// `χ` at the nodes and, for solid profiles, `χ(∞)`.
pub fn kernel_chi(
    profile: &SimilarityProfile,
    set: &CoefficientSet,
    a: f64,
    spec: &QuadratureSpec,
) -> Result<(Vec<f64>, Option<f64>)> {
    let t = compute_kernels(profile, set, a, 0.0, spec)?;
    Ok((t.chi, t.chi_inf))
}

/// `Φ` at the nodes and, for solid profiles, `Φ(∞)`.
pub fn kernel_phi(
    profile: &SimilarityProfile,
    set: &CoefficientSet,
    a: f64,
    k: f64,
    spec: &QuadratureSpec,
) -> Result<(Vec<f64>, Option<f64>)> {
    let t = compute_kernels(profile, set, a, k, spec)?;
    Ok((t.phi, t.phi_inf))
}

/// Boiling-front source terms entering the Stefan condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QTerms {
    pub p_star: f64,
    /// `∫_{α₀}^{ξ} K₁*/(s²L₁*) ds`
    pub source_integral: f64,
    /// `α₀²P* + C·source_integral`
    pub q: f64,
    /// `∫_{α₀}^{ξ} K₁*/(s²E₁) ds`, the flux-consistent source integral
    /// (stored as its product with `E₁(ξ)` to avoid overflow).
    pub flux_integral_times_e: f64,
    pub e_at_xi: f64,
    /// `α₀²P*·E₁(ξ) + C·E₁(ξ)·∫K₁*/(s²E₁)`, the liquid flux at `ξ`.
    pub q_times_e: f64,
}

pub fn kernel_q(
    xi: f64,
    u1: &SimilarityProfile,
    set: &CoefficientSet,
    front: &VaporFront,
    p: &PhysicalParams,
    spec: &QuadratureSpec,
) -> Result<QTerms> {
    let alpha0 = front.alpha0;
    if !(xi > alpha0) {
        return Err(Error::Domain(format!("xi = {xi} must exceed alpha0 = {alpha0}")));
    }
    let c = joule_prefactor(p.k, p.a);
    let guard = Guard::new();
    let source_integral = if c > 0.0 {
        let v = integrate(
            |s| {
                let st = guard.starred(set, Phase::Liquid, u1.eval(s));
                st.k / (s * s * st.l)
            },
            alpha0,
            Limit::Finite(xi),
            spec,
        )?;
        guard.check()?;
        v
    } else {
        0.0
    };
    let table = compute_kernels(u1, set, p.a, p.k, spec)?;
    let e_at_xi = KernelTable::last(&table.e);
    let j_xi = KernelTable::last(&table.j);
    let p_star = front.p_star(p);
    let q0 = alpha0 * alpha0 * p_star;
    Ok(QTerms {
        p_star,
        source_integral,
        q: q0 + c * source_integral,
        flux_integral_times_e: j_xi,
        e_at_xi,
        q_times_e: q0 * e_at_xi + c * j_xi,
    })
}
