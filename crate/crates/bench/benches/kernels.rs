use std::hint::black_box;

use contactkit::flows::{integrate, ContactField, IntegratorConfig};
use contactkit::integrability::{angle_solve, coisotropy_check, ray_project, AngleSolveConfig, Samples, Sign};
use contactkit::{ContactChart, Expr};
use contactkit_bench::{chi, symmetric_gauge, worked_example, worked_example_lifted};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const X: [f64; 3] = [0.3, 1.7, 2.1];

fn expressions(c: &mut Criterion) {
    let f = Expr::parse("sin(q*p) + exp(z/3)*p^2 - log(1 + q^2)", &["q", "p", "z"]).unwrap();
    let mut g = c.benchmark_group("expr");
    g.bench_function("parse", |b| {
        b.iter(|| Expr::parse(black_box("sin(q*p) + exp(z/3)*p^2 - log(1 + q^2)"), &["q", "p", "z"]))
    });
    g.bench_function("eval", |b| b.iter(|| f.eval(black_box(&X))));
    g.bench_function("jet1", |b| b.iter(|| f.eval_jet1(black_box(&X))));
    g.bench_function("jet2", |b| b.iter(|| f.eval_jet2(black_box(&X))));
    g.finish();
}

fn contact(c: &mut Criterion) {
    let f = Expr::parse("q*p^2 + z*q - p^3", &["q", "p", "z"]).unwrap();
    let h = Expr::parse("p*z + q^2", &["q", "p", "z"]).unwrap();
    let mut g = c.benchmark_group("contact");
    for (name, chart) in [("darboux", ContactChart::darboux(1)), ("general", symmetric_gauge())] {
        g.bench_with_input(BenchmarkId::new("hamiltonian_field", name), &chart, |b, ch| {
            b.iter(|| ch.hamiltonian_field_at(&f, black_box(&X)))
        });
        g.bench_with_input(BenchmarkId::new("jacobi_bracket", name), &chart, |b, ch| {
            b.iter(|| ch.jacobi_bracket_at(&f, &h, black_box(&X)))
        });
    }
    g.finish();
}

fn flows(c: &mut Criterion) {
    let s = worked_example();
    let f = &s.integrals()[1];
    let field = ContactField { chart: s.chart(), f };
    let mut g = c.benchmark_group("integrate");
    for (name, config) in [("rkf45", IntegratorConfig::default()), ("rk4", IntegratorConfig::rk4(0.01))] {
        g.bench_function(name, |b| b.iter(|| integrate(&field, black_box(&[2.0, 3.0, 5.0]), 1.0, &config)));
    }
    g.finish();
}

fn integrability(c: &mut Criterion) {
    let s = worked_example();
    let lifted = worked_example_lifted();
    let section = chi();
    let config = AngleSolveConfig::default();
    let lambda = [3.0, 5.0];
    let seeds = s.region().sample_points(50, 1);
    let points = Samples::given(seeds.iter().map(|x| ray_project(&s, &lambda, x).unwrap().x).collect());

    let mut g = c.benchmark_group("integrability");
    g.bench_function("ray_project", |b| b.iter(|| ray_project(&s, &lambda, black_box(&seeds[0]))));
    g.bench_function("coisotropy_check_50", |b| b.iter(|| coisotropy_check(&s, &lambda, &points, 1e-8)));
    g.sample_size(20);
    g.bench_function("angle_solve", |b| {
        b.iter(|| angle_solve(&lifted, &section, Sign::Minus, black_box(&[2.0, 3.0, 5.0, 1.0]), &config))
    });
    g.finish();
}

criterion_group!(benches, expressions, contact, flows, integrability);
criterion_main!(benches);
