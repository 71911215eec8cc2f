//! A-priori bounds on the kernels, Lipschitz estimates for the fixed-point
//! operators, the contraction functions `ε₁`, `ε₂`, and the sandwich
//! `Z₂ ≤ Z ≤ Z₁` for the Stefan condition.
//!
//! All functions take the bound constants as given; none of them looks at a
//! profile. Exponentially large factors are kept inside scaled special
//! functions (`erfcx`, scaled `h`) where possible.

use crate::coefficients::CoefficientBounds;
use crate::error::{Error, Result};
use crate::joule_prefactor;
use crate::vapor::{PhysicalParams, VaporFront};
use crate::special::{erfcx, g_function, h_scaled, one_minus_g, Limit};

const SQRT_PI: f64 = 1.772_453_850_905_516;

/// Bound constants together with the scalars every estimate needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimates {
    pub bounds: CoefficientBounds,
    pub a: f64,
    pub k: f64,
    pub alpha0: f64,
    pub p_star: f64,
    /// Latent-heat coefficient `M` of the Stefan condition.
    pub m: f64,
}

/// `x·y` with `0·∞ = 0`: a vanishing Lipschitz constant kills its term even
/// when the accompanying factor is unbounded.
fn mul0(x: f64, y: f64) -> f64 {
    if x == 0.0 || y == 0.0 {
        0.0
    } else {
        x * y
    }
}

impl Estimates {
    pub fn new(bounds: CoefficientBounds, front: &VaporFront, p: &PhysicalParams) -> Self {
        Self {
            bounds,
            a: p.a,
            k: p.k,
            alpha0: front.alpha0,
            p_star: front.p_star(p),
            m: p.stefan_m(),
        }
    }

    fn c(&self) -> f64 {
        joule_prefactor(self.k, self.a)
    }

    /// `Ñ₁/L_m + N_M·L̃₁/L_m²`
    fn s1(&self) -> f64 {
        self.bounds.liquid_ratio_lip()
    }

    /// `L_M·Ñ₂ + N_M·L̃₂`
    fn s2(&self) -> f64 {
        self.bounds.solid_ratio_lip()
    }

    fn fast(&self) -> f64 {
        self.a * self.a * self.bounds.n_max / self.bounds.l_min
    }

    fn slow(&self) -> f64 {
        self.a * self.a * self.bounds.n_min / self.bounds.l_max
    }

    // ---- kernel sandwiches ----

    /// Lower and upper bound on `E₁(η)`.
    pub fn e1_bounds(&self, eta: f64) -> (f64, f64) {
        let d = eta * eta - self.alpha0 * self.alpha0;
        ((-self.fast() * d).exp(), (-self.slow() * d).exp())
    }

    /// Lower and upper bound on `E₂(η)` for melt-front coefficient `xi`.
    pub fn e2_bounds(&self, eta: f64, xi: f64) -> (f64, f64) {
        let d = eta * eta - xi * xi;
        ((-self.fast() * d).exp(), (-self.slow() * d).exp())
    }

    /// Upper bound on `χ₁(η)`.
    pub fn chi1_upper(&self, eta: f64) -> Result<f64> {
        let b = &self.bounds;
        let hs = h_scaled(Limit::Finite(eta), b.n_min, b.l_max, self.alpha0, self.a)?;
        Ok(self.a / b.l_min * (b.n_min / b.l_max).sqrt() * hs)
    }

    /// Lower and upper bounds on `χ₂(η)`; `eta` may be infinite.
    pub fn chi2_bounds(&self, eta: Limit, xi: f64) -> Result<(f64, f64)> {
        let b = &self.bounds;
        let lo = self.a / b.l_max * (b.n_max / b.l_min).sqrt() * h_scaled(eta, b.n_max, b.l_min, xi, self.a)?;
        let hi = self.a / b.l_min * (b.n_min / b.l_max).sqrt() * h_scaled(eta, b.n_min, b.l_max, xi, self.a)?;
        Ok((lo, hi))
    }

    /// Elementary bound `(1/L_m)(1/ξ − 1/η)` on `χ₂(η)`.
    pub fn chi2_elementary(&self, eta: Limit, xi: f64) -> f64 {
        let inv = match eta {
            Limit::Finite(e) => 1.0 / e,
            Limit::Infinity => 0.0,
        };
        (1.0 / xi - inv) / self.bounds.l_min
    }

    /// Upper bound on `Φ₂(η)`, uniform in `η`.
    pub fn phi2_upper(&self, xi: f64) -> f64 {
        self.c() * self.bounds.k_max / (self.bounds.l_min * xi * xi)
    }

    // ---- Lipschitz estimates ----

    pub fn e1_tilde(&self, eta: f64) -> f64 {
        self.a * self.a * self.s1() * (eta * eta - self.alpha0 * self.alpha0)
    }

    pub fn chi1_tilde(&self, eta: f64) -> f64 {
        let (a0, b) = (self.alpha0, &self.bounds);
        self.a * self.a / b.l_min * self.s1() * (eta + a0 * a0 / eta - 2.0 * a0)
            + b.l_lip[0] / (b.l_min * b.l_min) * (1.0 / a0 - 1.0 / eta)
    }

    /// Lipschitz estimate for `Φ₁(η)`. Both outer-integral exponentials use
    /// the fast rate `a²N_M/L_m`, which is what bounds `1/E₁` from above.
    pub fn phi1_tilde(&self, eta: f64) -> f64 {
        let c = self.c();
        if c == 0.0 {
            return 0.0;
        }
        let (a0, b) = (self.alpha0, &self.bounds);
        let r = eta / a0;
        let grow = (self.fast() * (eta * eta - a0 * a0)).exp();
        let bracket1 = (1.0 / r).ln() + r + 1.0 / r - 0.5 / (r * r) - 1.5;
        let bracket2 = 0.5 / (a0 * a0) + 0.5 / (eta * eta) - 1.0 / (a0 * eta);
        let bracket3 = r.ln() - 0.5 / (r * r) - 1.5 + 2.0 / r;
        let lip_e = b.k_max / b.l_min * self.a * self.a * self.s1();
        let lip_mid = b.k_max * b.l_lip[0] / (b.l_min * b.l_min) + b.k_lip[0] / b.l_min;
        c * (mul0(lip_e, grow * bracket1.max(0.0))
            + mul0(lip_mid, grow * bracket2.max(0.0))
            + mul0(lip_e, grow * grow * bracket3.max(0.0)))
    }

    /// Lipschitz estimate for `E₂(η)`.
    pub fn e2_tilde(&self, eta: f64, xi: f64) -> f64 {
        let b = &self.bounds;
        let d = eta * eta - xi * xi;
        (-self.slow() * d).exp() * self.a * self.a / (b.l_min * b.l_min) * self.s2() * d
    }

    /// Lipschitz estimate for `χ₂(η)`; `eta` may be infinite.
    pub fn chi2_tilde(&self, eta: Limit, xi: f64) -> f64 {
        let b = &self.bounds;
        let w = self.a * (b.n_min / b.l_max).sqrt();
        let x0 = w * xi;
        // e^{x0²}(erf(x1) − erf(x0)) = erfcx(x0) − e^{x0²−x1²}·erfcx(x1)
        let span = match eta {
            Limit::Infinity => erfcx(x0),
            Limit::Finite(e) => {
                let x1 = w * e;
                erfcx(x0) - (-(x1 - x0) * (x1 + x0)).exp() * erfcx(x1)
            }
        };
        let lead = self.a * b.l_max.powf(1.5) * SQRT_PI / (2.0 * b.l_min.powi(4) * b.n_min.sqrt());
        mul0(lead * self.s2(), span) + b.l_lip[1] / (b.l_min * b.l_min * xi)
    }

    /// Lipschitz estimate for `Φ₂`, uniform in `η`. Terms whose Lipschitz
    /// factor vanishes are dropped; the rest are infinite when
    /// `R = a²N_M/L_m` exactly.
    pub fn phi2_tilde(&self, xi: f64) -> f64 {
        let c = self.c();
        if c == 0.0 {
            return 0.0;
        }
        let b = &self.bounds;
        let excess = b.decay_rate - self.fast();
        let inv_root = if excess > 0.0 { 1.0 / excess.sqrt() } else { f64::INFINITY };
        let s2 = self.s2();
        let pi = std::f64::consts::PI;
        let k2 = self.k * self.k;
        let t1 = mul0(k2 * b.k_max * s2 / (16.0 * pi.powf(1.5) * b.l_min.powi(3) * xi), inv_root);
        let t2 = mul0(k2 * b.k_lip[1] / (16.0 * self.a * self.a * pi.powf(1.5) * b.l_min * xi), inv_root);
        let t3a = mul0(self.a * self.a * b.l_max * s2 * SQRT_PI / (b.l_min.powi(4) * xi), inv_root);
        let t3b = b.l_lip[1] / (b.l_min * b.l_min * xi * xi);
        t1 + t2 + mul0(c * b.k_max, t3a + t3b)
    }

    // ---- contraction functions ----

    /// `ε₁(z) = 2α₀²P*·χ̃₁(z) + 2Φ̃₁(z)`.
    pub fn epsilon1(&self, z: f64) -> f64 {
        2.0 * self.alpha0 * self.alpha0 * self.p_star * self.chi1_tilde(z) + 2.0 * self.phi1_tilde(z)
    }

    /// The part of `ε₂` that grows with `z`, before the Joule factor.
    fn epsilon2_growth(&self, z: f64) -> f64 {
        let b = &self.bounds;
        let x = self.a * z * (b.n_min / b.l_max).sqrt();
        let xp = self.a * z * (b.n_max / b.l_min).sqrt();
        let num = 2.0
            * b.l_max
            * (mul0(b.l_max * b.l_max * self.s2() / (2.0 * b.l_min * b.l_min * b.n_min), g_function(x)) + b.l_lip[1]);
        if num == 0.0 {
            return 0.0;
        }
        num / (b.l_min * b.l_min * one_minus_g(xp))
    }

    /// `ε₂(z) = 2Φ̃₂(α₀) + T(z)·(1 + C·K_M/(L_m α₀²))`, with `T` the
    /// Lipschitz factor of `χ₂(η)/χ₂(∞)`.
    pub fn epsilon2(&self, z: f64) -> f64 {
        let b = &self.bounds;
        let joule = 1.0 + self.c() * b.k_max / (b.l_min * self.alpha0 * self.alpha0);
        2.0 * self.phi2_tilde(self.alpha0) + mul0(self.epsilon2_growth(z), joule)
    }

    /// Whether the solid contraction window is nonempty, `ε₂(α₀) < 1`.
    pub fn check_condepsilon2(&self) -> bool {
        self.epsilon2(self.alpha0) < 1.0
    }

    /// Root of `ε₁ = 1`; infinite when `ε₁ ≡ 0`.
    pub fn xi_bar1(&self) -> Result<f64> {
        let b = &self.bounds;
        let grows = self.s1() > 0.0 || b.l_lip[0] > 0.0 || (self.c() > 0.0 && b.k_lip[0] > 0.0);
        if !grows {
            return Ok(f64::INFINITY);
        }
        unit_crossing(|z| self.epsilon1(z), self.alpha0, "epsilon1")
    }

    /// Root of `ε₂ = 1`: `α₀` when the window is empty, infinite when `ε₂`
    /// stays constant below one.
    pub fn xi_bar2(&self) -> Result<f64> {
        if !self.check_condepsilon2() {
            return Ok(self.alpha0);
        }
        if self.epsilon2_growth(self.alpha0 * 2.0) == 0.0 {
            return Ok(f64::INFINITY);
        }
        unit_crossing(|z| self.epsilon2(z), self.alpha0, "epsilon2")
    }

    // ---- Stefan-condition sandwich ----

    /// Upper bound `Z₁(ξ)` given the window end `ξ̂` (possibly infinite).
    pub fn z1(&self, xi: f64, xi_hat: f64) -> f64 {
        let b = &self.bounds;
        let ck = self.c() * b.k_max;
        let omg = if xi_hat.is_finite() {
            one_minus_g(self.a * xi_hat * (b.n_max / b.l_min).sqrt())
        } else {
            0.0
        };
        let solid = if omg > 0.0 { b.l_max / (b.l_min * xi * omg) } else { f64::INFINITY };
        self.alpha0 * self.alpha0 * self.p_star + mul0(ck, 1.0 / self.alpha0 + solid)
    }

    fn solid_floor(&self, xi: f64) -> f64 {
        let b = &self.bounds;
        b.l_max * xi / one_minus_g(self.a * xi * (b.n_max / b.l_min).sqrt())
    }

    /// Lower bound `Z₂(ξ)`.
    pub fn z2(&self, xi: f64) -> f64 {
        let a0 = self.alpha0;
        a0 * a0 * self.p_star * (-self.fast() * (xi * xi - a0 * a0)).exp() - self.solid_floor(xi)
    }

    /// The lower bound as displayed in the existence theorem (prefactor `α₀`,
    /// growing exponential). Reported for comparison only.
    pub fn z2_as_displayed(&self, xi: f64) -> f64 {
        let a0 = self.alpha0;
        a0 * self.p_star * (self.fast() * (xi * xi - a0 * a0)).exp() - self.solid_floor(xi)
    }

    /// `Z₁(ξ̂) ≤ Mξ̂³`.
    pub fn upper_flag(&self, xi_hat: f64) -> bool {
        self.z1(xi_hat, xi_hat) <= self.m * xi_hat.powi(3)
    }

    /// `Z₂(α₀) ≥ Mα₀³`.
    pub fn lower_flag(&self) -> bool {
        self.z2(self.alpha0) >= self.m * self.alpha0.powi(3)
    }

    /// Same condition with the theorem's displayed `Z₂`.
    pub fn lower_flag_as_displayed(&self) -> bool {
        self.z2_as_displayed(self.alpha0) >= self.m * self.alpha0.powi(3)
    }

    /// Finite right end for the root search when both contraction windows
    /// are unbounded: the first `α₀·2ᵐ` at which `Z₁ ≤ Mξ³` holds with
    /// `ξ̂ = ξ`.
    pub fn search_cap(&self) -> Result<f64> {
        let mut z = self.alpha0 * 2.0;
        while z <= self.alpha0 * 1e6 {
            if self.upper_flag(z) {
                return Ok(z);
            }
            z *= 2.0;
        }
        Err(Error::Window(format!(
            "Z1(xi) <= M xi^3 fails for every xi up to {:e}",
            self.alpha0 * 1e6
        )))
    }
}

/// Smallest `z > z0` with `f(z) = 1` for increasing `f`, `f(z0) < 1`.
fn unit_crossing(f: impl Fn(f64) -> f64, z0: f64, name: &str) -> Result<f64> {
    if f(z0) >= 1.0 {
        return Ok(z0);
    }
    let mut lo = z0;
    let mut hi = z0 * 2.0;
    while !(f(hi) >= 1.0) {
        lo = hi;
        hi *= 2.0;
        if hi > z0 * 1e6 {
            return Err(Error::Window(format!("{name} stays below 1 up to {:e}", z0 * 1e6)));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) >= 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
