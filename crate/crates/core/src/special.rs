//! Error-function family and the adaptive quadrature engine.
//!
//! `erf` uses the all-positive series `erf(x) = 2/√π · e^{-x²} Σ 2ⁿx^{2n+1}/(2n+1)!!`
//! on `|x| < 2.5` (no cancellation between terms) and the Laplace continued
//! fraction for the scaled complement above that. The continued fraction is
//! also what makes `G(x) = √π·x·e^{x²}·erfc(x)` and `1 − G(x)` safe for large
//! arguments: `e^{x²}` is never formed on its own.

use crate::error::{Error, Result};

const SQRT_PI: f64 = 1.772_453_850_905_516;
const FRAC_2_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;

/// Depth of the backward continued-fraction evaluation; converged to
/// machine precision for every argument `x ≥ 1`.
const CF_TERMS: usize = 200;

/// Upper or lower integration limit that may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Limit {
    Finite(f64),
    Infinity,
}

impl Limit {
    pub fn is_infinite(self) -> bool {
        matches!(self, Limit::Infinity)
    }
}

impl From<f64> for Limit {
    fn from(x: f64) -> Self {
        Limit::Finite(x)
    }
}

/// Sum of the positive series `Σ 2ⁿx^{2n+1}/(2n+1)!!`, so that
/// `erf(x) = 2/√π · e^{-x²} · S(x)`.
fn positive_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    let mut n = 0.0;
    loop {
        n += 1.0;
        term *= 2.0 * x2 / (2.0 * n + 1.0);
        sum += term;
        if term <= 1e-17 * sum {
            break;
        }
    }
    sum
}

/// Tail `T` of the continued fraction `√π·erfcx(x) = 1/(x + T)`.
fn cf_tail(x: f64) -> f64 {
    let mut t = 0.0;
    for n in (1..=CF_TERMS).rev() {
        t = (n as f64 * 0.5) / (x + t);
    }
    t
}

/// Gauss error function.
pub fn erf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    let ax = x.abs();
    let v = if ax < 2.5 {
        FRAC_2_SQRT_PI * (-ax * ax).exp() * positive_series(ax)
    } else if ax < 6.5 {
        1.0 - erfcx(ax) * (-ax * ax).exp()
    } else {
        1.0
    };
    v.copysign(x)
}

/// Complementary error function `1 − erf(x)`, accurate in relative terms
/// for positive arguments.
pub fn erfc(x: f64) -> f64 {
    if x < 1.0 {
        1.0 - erf(x)
    } else {
        erfcx(x) * (-x * x).exp()
    }
}

/// Scaled complementary error function `e^{x²}·erfc(x)`.
pub fn erfcx(x: f64) -> f64 {
    if x >= 1.0 {
        1.0 / (SQRT_PI * (x + cf_tail(x)))
    } else if x >= 0.0 {
        (x * x).exp() - FRAC_2_SQRT_PI * positive_series(x)
    } else {
        2.0 * (x * x).exp() - erfcx(-x)
    }
}

/// `G(x) = √π·x·e^{x²}·(1 − erf(x))` for `x ≥ 0`; strictly increasing from
/// 0 towards 1.
pub fn g_function(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return 1.0;
    }
    if x >= 1.0 {
        x / (x + cf_tail(x))
    } else {
        SQRT_PI * x * erfcx(x)
    }
}

/// `1 − G(x)` without cancellation for large `x` (behaves like `1/(2x²)`).
pub fn one_minus_g(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x.is_infinite() {
        return 0.0;
    }
    if x >= 1.0 {
        let t = cf_tail(x);
        t / (x + t)
    } else {
        1.0 - SQRT_PI * x * erfcx(x)
    }
}

/// The auxiliary function
/// `h(η,N,L,z) = √π erf(wz) − √π erf(wη) + e^{-w²z²}/(wz) − e^{-w²η²}/(wη)`
/// with `w = a√(N/L)`; equals `∫_{wz}^{wη} e^{-t²}/t² dt`.
pub fn h(eta: Limit, n: f64, l: f64, z: f64, a: f64) -> Result<f64> {
    check_h_args(eta, n, l, z, a)?;
    let w = a * (n / l).sqrt();
    let lo = w * z;
    let head = SQRT_PI * erf(lo) + (-lo * lo).exp() / lo;
    let tail = match eta {
        Limit::Infinity => SQRT_PI,
        Limit::Finite(e) => {
            let hi = w * e;
            SQRT_PI * erf(hi) + (-hi * hi).exp() / hi
        }
    };
    Ok(head - tail)
}

/// `e^{w²z²}·h(η,N,L,z)` evaluated without forming `e^{w²z²}`.
pub fn h_scaled(eta: Limit, n: f64, l: f64, z: f64, a: f64) -> Result<f64> {
    check_h_args(eta, n, l, z, a)?;
    let w = a * (n / l).sqrt();
    let lo = w * z;
    let base = 1.0 / lo - SQRT_PI * erfcx(lo);
    Ok(match eta {
        Limit::Infinity => base,
        Limit::Finite(e) => {
            let hi = w * e;
            let decay = (-(hi - lo) * (hi + lo)).exp();
            base - decay * (1.0 / hi - SQRT_PI * erfcx(hi))
        }
    })
}

fn check_h_args(eta: Limit, n: f64, l: f64, z: f64, a: f64) -> Result<()> {
    if !(n > 0.0 && l > 0.0 && z > 0.0 && a > 0.0) {
        return Err(Error::Domain(format!(
            "h requires N, L, z, a > 0 (got N={n}, L={l}, z={z}, a={a})"
        )));
    }
    if let Limit::Finite(e) = eta {
        if !(e >= z) {
            return Err(Error::Domain(format!("h requires eta >= z (eta={e}, z={z})")));
        }
    }
    Ok(())
}

/// Tolerances for the adaptive Simpson engine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_depth: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            max_depth: 50,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) || self.max_depth < 1 {
            return Err(Error::InvalidParameter(format!(
                "quadrature tolerances must be positive and max_depth >= 1 ({self:?})"
            )));
        }
        Ok(())
    }
}

struct Simpson<'a, F> {
    f: &'a mut F,
    max_depth: usize,
    min_depth: usize,
    error: f64,
    exceeded: bool,
}

impl<F: FnMut(f64) -> f64> Simpson<'_, F> {
    #[allow(clippy::too_many_arguments)]
    fn step(&mut self, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, eps: f64, depth: usize) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = (self.f)(lm);
        let frm = (self.f)(rm);
        let h6 = (b - a) / 12.0;
        let left = h6 * (fa + 4.0 * flm + fm);
        let right = h6 * (fm + 4.0 * frm + fb);
        let diff = left + right - whole;
        // Below this the difference is round-off, not truncation error.
        let noise = 64.0 * f64::EPSILON * (left.abs() + right.abs());
        if depth >= self.min_depth && (diff.abs() <= 15.0 * eps || diff.abs() <= noise) {
            self.error += diff.abs() / 15.0;
            return left + right + diff / 15.0;
        }
        if depth >= self.max_depth || !diff.is_finite() {
            self.exceeded = true;
            self.error += diff.abs() / 15.0;
            return left + right + diff / 15.0;
        }
        self.step(a, m, fa, flm, fm, left, 0.5 * eps, depth + 1)
            + self.step(m, b, fm, frm, fb, right, 0.5 * eps, depth + 1)
    }
}

fn simpson<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, spec: &QuadratureSpec, min_depth: usize) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let eps = (spec.rel_tol * whole.abs()).max(spec.abs_tol);
    let mut s = Simpson {
        f,
        max_depth: spec.max_depth,
        min_depth,
        error: 0.0,
        exceeded: false,
    };
    let value = s.step(a, b, fa, fm, fb, whole, eps, 0);
    if s.exceeded || !value.is_finite() {
        return Err(Error::Quadrature {
            partial: value,
            estimate: s.error,
        });
    }
    Ok(value)
}

/// Adaptive Simpson quadrature with Richardson correction. A semi-infinite
/// range is mapped onto `[0, 1)` with `v = lo + s/(1 − s)`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: Limit, spec: &QuadratureSpec) -> Result<f64> {
    match hi {
        Limit::Finite(b) => simpson(&mut f, lo, b, spec, 1),
        Limit::Infinity => {
            // The mapped integrand has a finite limit at s = 1 for v⁻² decay;
            // sample it just short of the endpoint.
            let s_max = 1.0 - f64::EPSILON * 4096.0;
            let mut g = |s: f64| {
                let s = s.min(s_max);
                let one_minus = 1.0 - s;
                let v = lo + s / one_minus;
                let fv = f(v);
                if fv == 0.0 {
                    0.0
                } else {
                    fv / (one_minus * one_minus)
                }
            };
            simpson(&mut g, 0.0, 1.0, spec, 3)
        }
    }
}

const GL8_X: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL8_W: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// Fixed 8-point Gauss–Legendre rule on `[lo, hi]`, for short panels of
/// smooth integrands where an adaptive estimate would cost too much.
pub fn gauss8<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64) -> f64 {
    let c = 0.5 * (lo + hi);
    let r = 0.5 * (hi - lo);
    let mut sum = 0.0;
    for (x, w) in GL8_X.iter().zip(GL8_W) {
        sum += w * (f(c - r * x) + f(c + r * x));
    }
    sum * r
}

/// Running integral `F[i] = ∫_{nodes[0]}^{nodes[i]} f`, accumulated panel by
/// panel so that `F[i+1] − F[i]` is exactly the panel integral.
pub fn cumulative<F: FnMut(f64) -> f64>(mut f: F, nodes: &[f64], spec: &QuadratureSpec) -> Result<Vec<f64>> {
    if nodes.len() < 2 {
        return Err(Error::InvalidParameter("cumulative quadrature needs at least two nodes".into()));
    }
    if nodes.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter("cumulative quadrature nodes must be strictly ascending".into()));
    }
    let mut out = Vec::with_capacity(nodes.len());
    let mut acc = 0.0;
    out.push(acc);
    for w in nodes.windows(2) {
        acc += simpson(&mut f, w[0], w[1], spec, 1)?;
        out.push(acc);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Alternating Taylor series, used only as an independent reference.
    fn erf_taylor(x: f64, terms: usize) -> f64 {
        let mut sum = 0.0;
        let mut fact = 1.0;
        for n in 0..terms {
            if n > 0 {
                fact *= n as f64;
            }
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            sum += sign * x.powi(2 * n as i32 + 1) / (fact * (2 * n + 1) as f64);
        }
        sum * FRAC_2_SQRT_PI
    }

    #[test]
    fn erf_reference_values() {
        assert_eq!(erf(0.0), 0.0);
        let oracle = erf_taylor(1.0, 30);
        assert!((oracle - 0.842_700_792_9).abs() < 1e-10);
        assert!((erf(1.0) - oracle).abs() < 1e-15);
        assert!((erf(-1.0) + oracle).abs() < 1e-15);
        // Known high-precision values.
        assert!((erf(0.5) - 0.520_499_877_813_046_5).abs() < 1e-15);
        assert!((erf(2.0) - 0.995_322_265_018_952_7).abs() < 1e-15);
        assert!((erf(3.0) - 0.999_977_909_503_001_4).abs() < 1e-15);
    }

    #[test]
    fn erfc_tail_is_relatively_accurate() {
        // erfc(5) = 1.5374597944280348e-12, erfc(10) = 2.088487583762545e-45
        assert!((erfc(5.0) / 1.537_459_794_428_034_8e-12 - 1.0).abs() < 1e-13);
        assert!((erfc(10.0) / 2.088_487_583_762_545e-45 - 1.0).abs() < 1e-13);
        // Continuity at the series / continued fraction switch.
        let below = erfcx(1.0 - 1e-12);
        let above = erfcx(1.0);
        assert!((below - above).abs() < 1e-11);
    }

    #[test]
    fn g_function_values() {
        assert_eq!(g_function(0.0), 0.0);
        let expected = SQRT_PI * 1f64.exp() * (1.0 - erf_taylor(1.0, 40));
        assert!((expected - 0.757_872).abs() < 1e-6);
        assert!((g_function(1.0) - expected).abs() < 1e-13);
        assert!((g_function(50.0) - 1.0).abs() < 1e-3);
        // Asymptotics 1 − 1/(2x²) + 3/(4x⁴).
        let x: f64 = 50.0;
        let asym = 1.0 / (2.0 * x * x) - 3.0 / (4.0 * x.powi(4));
        assert!((one_minus_g(x) / asym - 1.0).abs() < 1e-5);
        assert!(g_function(1e6) < 1.0);
        assert!(one_minus_g(30.0) > 0.0);
    }

    #[test]
    fn gauss8_is_exact_for_degree_15() {
        let f = |x: f64| x.powi(15) - 3.0 * x.powi(8) + 1.0;
        let exact = (2f64.powi(16) - 1.0) / 16.0 - 3.0 * (2f64.powi(9) - 1.0) / 9.0 + 1.0;
        assert!((gauss8(f, 1.0, 2.0) - exact).abs() < 1e-10 * exact.abs());
    }

    #[test]
    fn h_examples() {
        assert_eq!(h(Limit::Finite(1.3), 2.0, 0.5, 1.3, 0.7).unwrap(), 0.0);
        let e1 = erf_taylor(1.0, 30);
        let inf = h(Limit::Infinity, 1.0, 1.0, 1.0, 1.0).unwrap();
        let expected = SQRT_PI * (e1 - 1.0) + (-1f64).exp();
        assert!((expected - 0.089_073_86).abs() < 1e-8);
        assert!((inf - expected).abs() < 1e-14);
        let two = h(Limit::Finite(2.0), 1.0, 1.0, 1.0, 1.0).unwrap();
        let expected2 = SQRT_PI * (e1 - erf_taylor(2.0, 60)) + (-1f64).exp() - (-4f64).exp() / 2.0;
        assert!((expected2 - 0.088_207_11).abs() < 1e-8);
        assert!((two - expected2).abs() < 1e-14);
        assert!(h(Limit::Finite(0.5), 1.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn h_scaled_matches_unscaled() {
        for &(eta, n, l, z, a) in &[(2.0, 1.0, 1.0, 1.0, 1.0), (3.5, 2.0, 0.7, 1.2, 0.8), (1.01, 1.0, 3.0, 1.0, 2.0)] {
            let plain = h(Limit::Finite(eta), n, l, z, a).unwrap();
            let w = a * (n / l).sqrt() * z;
            let scaled = h_scaled(Limit::Finite(eta), n, l, z, a).unwrap();
            assert!((scaled - plain * (w * w).exp()).abs() < 1e-12 * scaled.abs().max(1e-3));
        }
        // Large z: plain form underflows, scaled form tends to 1/(2w³).
        let s = h_scaled(Limit::Infinity, 1.0, 1.0, 40.0, 1.0).unwrap();
        assert!((s * 2.0 * 40f64.powi(3) - 1.0).abs() < 1e-2);
    }

    #[test]
    fn quadrature_examples() {
        let spec = QuadratureSpec::default();
        assert!((integrate(|_| 1.0, 0.0, 1.0.into(), &spec).unwrap() - 1.0).abs() < 1e-14);
        assert!((integrate(|v| 3.0 * v * v, 0.0, 2.0.into(), &spec).unwrap() - 8.0).abs() < 1e-12);
        let tail = integrate(|v| (-v * v).exp() / (v * v), 1.0, Limit::Infinity, &spec).unwrap();
        let expected = (-1f64).exp() - SQRT_PI * (1.0 - erf_taylor(1.0, 30));
        assert!((tail - expected).abs() < 1e-10, "{tail} vs {expected}");
        let algebraic = integrate(|v| 1.0 / (v * v), 2.0, Limit::Infinity, &spec).unwrap();
        assert!((algebraic - 0.5).abs() < 1e-9);
    }

    #[test]
    fn quadrature_depth_error_carries_partial_result() {
        let spec = QuadratureSpec { rel_tol: 1e-14, abs_tol: 1e-300, max_depth: 3 };
        match integrate(|v: f64| v.sqrt(), 0.0, 1.0.into(), &spec) {
            Err(Error::Quadrature { partial, estimate }) => {
                assert!((partial - 2.0 / 3.0).abs() < 1e-2);
                assert!(estimate > 0.0);
            }
            other => panic!("expected quadrature error, got {other:?}"),
        }
    }

    #[test]
    fn cumulative_examples() {
        let spec = QuadratureSpec::default();
        let c = cumulative(|_| 2.0, &[0.0, 0.5, 1.0], &spec).unwrap();
        assert_eq!(c, vec![0.0, 1.0, 2.0]);
        let c = cumulative(|v| v, &[0.0, 1.0, 2.0], &spec).unwrap();
        assert!((c[1] - 0.5).abs() < 1e-15 && (c[2] - 2.0).abs() < 1e-15);
        let c = cumulative(|v| (-v * v).exp(), &[0.0, 1.0], &spec).unwrap();
        let expected = 0.5 * SQRT_PI * erf_taylor(1.0, 30);
        assert!((expected - 0.746_824).abs() < 1e-6);
        assert!((c[1] - expected).abs() < 1e-11);
        assert!(cumulative(|v| v, &[0.0], &spec).is_err());
        assert!(cumulative(|v| v, &[0.0, 0.0, 1.0], &spec).is_err());
    }
}
