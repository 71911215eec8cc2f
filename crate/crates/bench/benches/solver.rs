use std::hint::black_box;
use std::path::PathBuf;

use criterion::{criterion_group, criterion_main, Criterion};

use stefan_core::fixed_point::{initial_liquid, ViolationPolicy};
use stefan_core::interface::{evaluate_z, solve_xi, windows, Problem, XiSolveSettings};
use stefan_core::kernels::compute_kernels;
use stefan_core::pipeline::build_problem;
use stefan_core::RunConfig;

fn problem(name: &str) -> Problem {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
    build_problem(&RunConfig::from_path(&path).unwrap(), ViolationPolicy::Abort).unwrap()
}

fn kernels(c: &mut Criterion) {
    for name in ["demo.cfg", "mixed_joule.cfg"] {
        let pr = problem(name);
        let u = initial_liquid(pr.alpha0(), 1.0, pr.picard.grid_size).unwrap();
        c.bench_function(&format!("kernels/{name}"), |b| {
            b.iter(|| compute_kernels(black_box(&u), &pr.set, pr.params.a, pr.params.k, &pr.quadrature).unwrap())
        });
    }
}

fn picard(c: &mut Criterion) {
    for name in ["demo.cfg", "affine.cfg"] {
        let pr = problem(name);
        let end = windows(&pr.estimates()).unwrap().search_end;
        let xi = 0.5 * (pr.alpha0() + end);
        c.bench_function(&format!("evaluate_z/{name}"), |b| {
            b.iter(|| evaluate_z(&pr, black_box(xi), end, &pr.picard).unwrap())
        });
    }
}

fn root(c: &mut Criterion) {
    let mut g = c.benchmark_group("solve_xi");
    g.sample_size(10);
    for name in ["demo.cfg", "affine.cfg"] {
        let pr = problem(name);
        g.bench_function(name, |b| b.iter(|| solve_xi(&pr, &XiSolveSettings::default()).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, kernels, picard, root);
criterion_main!(benches);
