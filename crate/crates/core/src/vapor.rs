//! Boiling front: ignition threshold, front coefficient `α₀`, and the
//! linear temperature profile of the vapor zone.

use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Scalar physical constants of the arc model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    /// Arc power.
    pub p: f64,
    /// Global diffusivity-like constant; fronts move as `2a·coef·√t`.
    pub a: f64,
    pub lambda_b: f64,
    pub l_b: f64,
    pub gamma_b: f64,
    pub theta_ion: f64,
    pub theta_b: f64,
    pub theta_m: f64,
    pub l_m: f64,
    pub gamma_m: f64,
    /// Current ramp coefficient, `j = k√t/(2πr²)`.
    pub k: f64,
}

impl PhysicalParams {
    /// `k = I₀·sin(ω·t_a)/√t_a`.
    pub fn ramp_from_current(i0: f64, omega: f64, t_a: f64) -> f64 {
        i0 * (omega * t_a).sin() / t_a.sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("P", self.p),
            ("a", self.a),
            ("lambda_b", self.lambda_b),
            ("L_b", self.l_b),
            ("gamma_b", self.gamma_b),
            ("theta_m", self.theta_m),
            ("l_m", self.l_m),
            ("gamma_m", self.gamma_m),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if !(self.k >= 0.0 && self.k.is_finite()) {
            return Err(Error::InvalidParameter(format!("k must be nonnegative, got {}", self.k)));
        }
        if !(self.theta_ion > self.theta_b && self.theta_b > self.theta_m) {
            return Err(Error::InvalidParameter(format!(
                "temperatures must satisfy theta_ion > theta_b > theta_m (got {}, {}, {})",
                self.theta_ion, self.theta_b, self.theta_m
            )));
        }
        Ok(())
    }

    /// Latent-heat coefficient of the Stefan condition, `2a²·l_m·γ_m/θ_m`.
    pub fn stefan_m(&self) -> f64 {
        2.0 * self.a * self.a * self.l_m * self.gamma_m / self.theta_m
    }

    /// Smallest power that sustains a boiling front.
    pub fn ignition_threshold(&self) -> f64 {
        let dtheta = self.theta_ion - self.theta_b;
        2.0 * self.a * (2.0 * PI).sqrt() * (self.lambda_b * self.l_b * self.gamma_b * dtheta).sqrt()
    }
}

pub fn check_ignition(p: &PhysicalParams) -> bool {
    p.p >= p.ignition_threshold()
}

/// The quadratic `α² − Aα + B = 0` and its physical root.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VaporFront {
    pub alpha0: f64,
    pub a_coef: f64,
    pub b_coef: f64,
    pub discriminant: f64,
}

impl VaporFront {
    /// Both roots, smaller first.
    pub fn roots(&self) -> (f64, f64) {
        (self.b_coef / self.alpha0, self.alpha0)
    }

    /// Dimensionless arc power `P·exp(−α₀²)/(√π·θ_m)`.
    pub fn p_star(&self, p: &PhysicalParams) -> f64 {
        p.p * (-self.alpha0 * self.alpha0).exp() / (PI.sqrt() * p.theta_m)
    }

    /// `α(t) = 2a·α₀·√t`.
    pub fn position(&self, p: &PhysicalParams, t: f64) -> f64 {
        2.0 * p.a * self.alpha0 * t.sqrt()
    }

    /// A front with a prescribed coefficient, bypassing the quadratic.
    pub fn prescribed(alpha0: f64) -> Self {
        Self {
            alpha0,
            a_coef: f64::NAN,
            b_coef: f64::NAN,
            discriminant: f64::NAN,
        }
    }
}

pub fn quadratic_coefficients(p: &PhysicalParams) -> (f64, f64) {
    let a2 = p.a * p.a;
    let lg = p.l_b * p.gamma_b;
    let a = p.p / (2.0 * a2 * PI.sqrt() * lg);
    let b = p.lambda_b * (p.theta_ion - p.theta_b) / (2.0 * a2 * lg);
    (a, b)
}

/// Larger root of `α² − Aα + B = 0`, computed as `(A + √(A² − 4B))/2`,
/// which equals `2B/(A − √(A² − 4B))` without its cancellation.
pub fn alpha0_from_quadratic(a: f64, b: f64) -> Result<VaporFront> {
    let disc = a * a - 4.0 * b;
    let scale = a * a;
    if disc < -1e-14 * scale || !(a > 0.0) || b < 0.0 {
        return Err(Error::Model(format!(
            "boiling front does not exist: A = {a}, B = {b}, discriminant {disc}"
        )));
    }
    let disc = disc.max(0.0);
    Ok(VaporFront {
        alpha0: 0.5 * (a + disc.sqrt()),
        a_coef: a,
        b_coef: b,
        discriminant: disc,
    })
}

pub fn alpha0(p: &PhysicalParams) -> Result<VaporFront> {
    if !check_ignition(p) {
        return Err(Error::Model(format!(
            "ignition condition violated: P = {} below threshold {}",
            p.p,
            p.ignition_threshold()
        )));
    }
    let (a, b) = quadratic_coefficients(p);
    alpha0_from_quadratic(a, b)
}

/// Linear vapor temperature `θ_ion − (θ_ion − θ_b)·r/α(t)` for `0 ≤ r ≤ α(t)`.
pub fn vapor_temperature(r: f64, t: f64, front: &VaporFront, p: &PhysicalParams) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("time must be positive, got {t}")));
    }
    let alpha = front.position(p, t);
    if !(0.0..=alpha).contains(&r) {
        return Err(Error::Domain(format!("r = {r} outside the vapor zone [0, {alpha}]")));
    }
    Ok(p.theta_ion - (p.theta_ion - p.theta_b) * r / alpha)
}

/// Flux balance at the boiling front, relative to the arc flux
/// `P/(2a√(πt))`: zero when `α₀` is a root of the quadratic.
pub fn vapor_flux_residual(t: f64, front: &VaporFront, p: &PhysicalParams) -> f64 {
    let arc = p.p / (2.0 * p.a * (PI * t).sqrt());
    let alpha = front.position(p, t);
    let d_alpha = p.a * front.alpha0 / t.sqrt();
    let conducted = p.lambda_b * (p.theta_ion - p.theta_b) / alpha;
    let latent = p.l_b * p.gamma_b * d_alpha;
    (arc - (conducted + latent)) / arc
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit(p: f64) -> PhysicalParams {
        PhysicalParams {
            p,
            a: 1.0,
            lambda_b: 1.0,
            l_b: 1.0,
            gamma_b: 1.0,
            theta_ion: 2.0,
            theta_b: 1.0,
            theta_m: 0.5,
            l_m: 1.0,
            gamma_m: 1.0,
            k: 0.0,
        }
    }

    #[test]
    fn ignition_threshold_examples() {
        assert!(check_ignition(&unit(6.0)));
        assert!(!check_ignition(&unit(5.0)));
        let thr = 2.0 * (2.0 * PI).sqrt();
        assert!((unit(1.0).ignition_threshold() - 5.01326).abs() < 1e-5);
        let at = unit(thr);
        assert!(check_ignition(&at));
        let f = alpha0(&at).unwrap();
        assert!(f.discriminant.abs() < 1e-12);
    }

    #[test]
    fn quadratic_root_examples() {
        let f = alpha0_from_quadratic(5.0, 4.0).unwrap();
        assert_eq!(f.alpha0, 4.0);
        assert_eq!(f.roots(), (1.0, 4.0));
        let f = alpha0_from_quadratic(4.0, 4.0).unwrap();
        assert_eq!(f.alpha0, 2.0);
        let f = alpha0_from_quadratic(3.0, 1e-300).unwrap();
        assert_eq!(f.alpha0, 3.0);
        assert!(alpha0_from_quadratic(1.0, 1.0).is_err());
    }

    #[test]
    fn parameters_map_to_quadratic() {
        // A = P/(2√π), B = 1/2 with unit constants
        let p = unit(10.0);
        let (a, b) = quadratic_coefficients(&p);
        assert!((a - 10.0 / (2.0 * PI.sqrt())).abs() < 1e-15);
        assert_eq!(b, 0.5);
        let f = alpha0(&p).unwrap();
        let closed = 2.0 * PI.sqrt() * 1.0 / (10.0 - (100.0f64 - 8.0 * PI).sqrt());
        assert!((f.alpha0 - closed).abs() < 1e-14 * closed);
        assert!(matches!(alpha0(&unit(5.0)), Err(Error::Model(_))));
    }

    #[test]
    fn vapor_profile_is_linear() {
        let p = unit(10.0);
        let f = alpha0(&p).unwrap();
        let t = 2.5;
        let al = f.position(&p, t);
        assert_eq!(vapor_temperature(0.0, t, &f, &p).unwrap(), 2.0);
        assert!((vapor_temperature(al, t, &f, &p).unwrap() - 1.0).abs() < 1e-15);
        assert!((vapor_temperature(al / 2.0, t, &f, &p).unwrap() - 1.5).abs() < 1e-15);
        assert!(matches!(vapor_temperature(al * 1.01, t, &f, &p), Err(Error::Domain(_))));
    }

    #[test]
    fn flux_residual_vanishes_on_root_only() {
        let p = unit(10.0);
        let f = alpha0(&p).unwrap();
        for t in [0.1, 1.0, 10.0] {
            assert!(vapor_flux_residual(t, &f, &p).abs() < 1e-12);
        }
        let mut g = f;
        g.alpha0 *= 1.01;
        let r1 = vapor_flux_residual(1.0, &g, &p);
        assert!(r1.abs() > 1e-4);
        // the unscaled residual times √t is time independent
        let raw = |t: f64| vapor_flux_residual(t, &g, &p) * p.p / (2.0 * p.a * (PI * t).sqrt()) * t.sqrt();
        assert!((raw(0.1) - raw(10.0)).abs() < 1e-12 * raw(1.0).abs());
    }

    proptest! {
        #[test]
        fn alpha0_properties(
            a in 0.2f64..3.0, lb in 0.1f64..10.0, lat in 0.1f64..10.0, gb in 0.1f64..10.0,
            dth in 0.1f64..100.0, excess in 0.0f64..5.0,
        ) {
            let mut p = unit(1.0);
            p.a = a; p.lambda_b = lb; p.l_b = lat; p.gamma_b = gb;
            p.theta_b = 10.0; p.theta_ion = 10.0 + dth; p.theta_m = 5.0;
            p.p = p.ignition_threshold() * (1.0 + excess);
            let f = alpha0(&p).unwrap();
            prop_assert!(f.alpha0 > 0.0);
            let q = f.alpha0 * f.alpha0 - f.a_coef * f.alpha0 + f.b_coef;
            prop_assert!(q.abs() <= 1e-12 * f.alpha0 * f.alpha0);
            let mut hotter = p;
            hotter.p *= 1.05;
            prop_assert!(alpha0(&hotter).unwrap().alpha0 > f.alpha0);
        }
    }
}
