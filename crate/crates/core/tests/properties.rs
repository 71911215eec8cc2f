use proptest::prelude::*;

use stefan_core::coefficients::{check_hypotheses, estimate_bounds, PhaseLaws};
use stefan_core::fixed_point::{apply_v, apply_w, initial_liquid, initial_solid, PicardSettings};
use stefan_core::interface::{solve_xi, XiSolveSettings};
use stefan_core::pipeline::{build_problem, cmd_solve};
use stefan_core::special::{cumulative, erf, g_function, integrate};
use stefan_core::{
    CoefficientFamily, CoefficientSet, Limit, Phase, PhaseRanges, QuadratureSpec, RunConfig, SimilarityProfile,
};

fn config(name: &str) -> RunConfig {
    let path = std::path::PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
    RunConfig::from_path(&path).unwrap()
}

fn family() -> impl Strategy<Value = CoefficientFamily> {
    prop_oneof![
        (0.5f64..2.0).prop_map(CoefficientFamily::Constant),
        (0.8f64..1.5, -0.02f64..0.02).prop_map(|(intercept, slope)| CoefficientFamily::Affine { intercept, slope }),
        (0.5f64..2.0, -0.05f64..0.05).prop_map(|(scale, rate)| CoefficientFamily::Exponential { scale, rate }),
    ]
}

fn laws() -> impl Strategy<Value = PhaseLaws> {
    (family(), family(), family(), prop_oneof![Just(CoefficientFamily::Constant(0.0)), family()])
        .prop_map(|(c, gamma, lambda, rho)| PhaseLaws { c, gamma, lambda, rho })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn erf_is_odd_and_increasing(x in -8.0f64..8.0, dx in 1e-6f64..1.0) {
        prop_assert_eq!(erf(x) + erf(-x), 0.0);
        prop_assert!(erf(x + dx) >= erf(x));
    }

    #[test]
    fn g_stays_in_unit_interval_and_increases(x in 0.0f64..100.0, dx in 1e-3f64..1.0) {
        let (g0, g1) = (g_function(x), g_function(x + dx));
        prop_assert!((0.0..1.0).contains(&g0));
        prop_assert!(g1 >= g0);
    }

    #[test]
    fn integrals_are_additive(a in 0.1f64..1.0, b in 1.0f64..2.0, c in 2.0f64..4.0, w in 0.1f64..3.0) {
        let spec = QuadratureSpec::default();
        let f = |v: f64| (-w * v * v).exp() / (v * v);
        let ab = integrate(f, a, Limit::Finite(b), &spec).unwrap();
        let bc = integrate(f, b, Limit::Finite(c), &spec).unwrap();
        let ac = integrate(f, a, Limit::Finite(c), &spec).unwrap();
        // each integral carries its own relative error budget
        let budget = 10.0 * spec.abs_tol + spec.rel_tol * (ab.abs() + bc.abs() + ac.abs());
        prop_assert!((ab + bc - ac).abs() <= budget);
    }

    #[test]
    fn cumulative_ends_at_the_full_integral(lo in 0.2f64..1.0, span in 0.5f64..5.0, n in 3usize..40) {
        let spec = QuadratureSpec::default();
        let nodes: Vec<f64> = (0..n).map(|i| lo + span * i as f64 / (n - 1) as f64).collect();
        let f = |v: f64| v.sin() / v;
        let c = cumulative(f, &nodes, &spec).unwrap();
        let full = integrate(f, lo, Limit::Finite(lo + span), &spec).unwrap();
        let scale: f64 = c.iter().map(|x| x.abs()).sum::<f64>() + full.abs();
        prop_assert!((c[n - 1] - full).abs() <= 10.0 * spec.abs_tol + spec.rel_tol * scale);
    }

    #[test]
    fn estimated_bounds_pass_hypotheses(liquid in laws(), solid in laws(), theta_b in 2.0f64..20.0, a in 0.5f64..2.0) {
        let set = CoefficientSet { liquid, solid, theta_m: 1.0 };
        let ranges = PhaseRanges::physical(1.0, theta_b);
        let b = estimate_bounds(&set, &ranges, a, 129, 1.1).unwrap();
        let rep = check_hypotheses(&b, &set, &ranges, a, 129, None).unwrap();
        prop_assert!(rep.no_failures(), "{:?}", rep);
        // sampled pairs respect the Lipschitz constants
        let (lo, hi) = ranges.liquid;
        for i in 0..20 {
            let u = lo + (hi - lo) * i as f64 / 20.0;
            let v = u + (hi - lo) / 37.0;
            let (su, sv) = (set.starred(Phase::Liquid, u).unwrap(), set.starred(Phase::Liquid, v).unwrap());
            prop_assert!((su.l - sv.l).abs() <= b.l_lip[0] * (v - u) * (1.0 + 1e-12));
            prop_assert!((su.n - sv.n).abs() <= b.n_lip[0] * (v - u) * (1.0 + 1e-12));
            prop_assert!((su.k - sv.k).abs() <= b.k_lip[0] * (v - u) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn scaling_conductivity_scales_starred_l(t in 0.1f64..10.0, u in 0.0f64..5.0, l in laws()) {
        let set = CoefficientSet { liquid: l.clone(), solid: l.clone(), theta_m: 1.0 };
        let mut scaled = set.clone();
        scaled.liquid.lambda = set.liquid.lambda.scaled(t);
        let (s0, s1) = (set.starred(Phase::Liquid, u).unwrap(), scaled.starred(Phase::Liquid, u).unwrap());
        prop_assert!((s1.l - t * s0.l).abs() <= 1e-14 * s1.l.abs());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn operators_map_into_the_admissible_class(xi in 0.6f64..1.5, k in 0.0f64..3.0) {
        let cfg = config("exponential_joule.cfg");
        let mut pr = build_problem(&cfg, stefan_core::fixed_point::ViolationPolicy::Abort).unwrap();
        pr.params.k = k;
        let n = 65;
        let u1 = initial_liquid(pr.alpha0(), xi, n).unwrap();
        let v = apply_v(&u1, &pr.front, &pr.set, &pr.params, &pr.quadrature).unwrap();
        prop_assert_eq!(v.values()[n - 1], 0.0);
        let u2 = initial_solid(xi, &pr.bounds, pr.params.a, n).unwrap();
        let w = apply_w(&u2, &pr.set, &pr.params, &pr.quadrature).unwrap();
        prop_assert_eq!(w.values()[0], 0.0);
        prop_assert!(w.values().iter().all(|&x| (-1.0 - 1e-9..=1e-12).contains(&x)));
        prop_assert!((w.values()[n - 1] + 1.0).abs() < 1e-9);
    }
}

fn profile_values(p: &SimilarityProfile) -> Vec<u64> {
    p.values().iter().map(|v| v.to_bits()).collect()
}

#[test]
fn solve_is_bitwise_reproducible() {
    let cfg = config("affine.cfg");
    let a = cmd_solve(&cfg, false).unwrap();
    let b = cmd_solve(&cfg, false).unwrap();
    assert_eq!(a.xi.xi_star.to_bits(), b.xi.xi_star.to_bits());
    assert_eq!(profile_values(&a.solution.u1), profile_values(&b.solution.u1));
    assert_eq!(profile_values(&a.solution.u2), profile_values(&b.solution.u2));
    assert_eq!(a.report.machine_lines(), b.report.machine_lines());
}

#[test]
fn halving_root_tolerance_stays_in_bracket() {
    let cfg = config("affine.cfg");
    let pr = build_problem(&cfg, stefan_core::fixed_point::ViolationPolicy::Abort).unwrap();
    let mut s = XiSolveSettings {
        root_tol: 1e-6,
        ..Default::default()
    };
    let coarse = solve_xi(&pr, &s).unwrap();
    s.root_tol *= 0.5;
    let fine = solve_xi(&pr, &s).unwrap();
    let (lo, hi) = coarse.bracket;
    assert!((fine.xi_star - coarse.xi_star).abs() <= hi - lo);
}

#[test]
fn reconstruction_round_trips_to_similarity_values() {
    let out = cmd_solve(&config("mixed_joule.cfg"), false).unwrap();
    let s = &out.solution;
    let t: f64 = 2.5;
    for prof in [&s.u1, &s.u2] {
        for (&eta, &u) in prof.nodes().iter().zip(prof.values()) {
            let theta = s.temperature(2.0 * s.params.a * t.sqrt() * eta, t).unwrap();
            assert!((theta / s.params.theta_m - 1.0 - u).abs() <= 4.0 * f64::EPSILON * (1.0 + u.abs()));
        }
    }
}

#[test]
fn fixed_point_residual_at_termination() {
    let out = cmd_solve(&config("exponential_joule.cfg"), false).unwrap();
    let pr = &out.problem;
    let tol = PicardSettings::default().tol;
    let v = apply_v(&out.solution.u1, &pr.front, &pr.set, &pr.params, &pr.quadrature).unwrap();
    let w = apply_w(&out.solution.u2, &pr.set, &pr.params, &pr.quadrature).unwrap();
    assert!(v.sup_distance(&out.solution.u1) <= 2.0 * tol);
    assert!(w.sup_distance(&out.solution.u2) <= 2.0 * tol);
}
