use std::hint::black_box;

use budget_core::{
    compose, integrate, sweep, IntegratorConfig, Method, Model, ModelParams, SweepOutput,
    SweepParam, SweepSpec,
};
use criterion::{criterion_group, criterion_main, Criterion};

fn surplus() -> ModelParams {
    ModelParams::from_fixed_point(0.125, 1.0, 10.0).unwrap()
}

fn bench_integrators(c: &mut Criterion) {
    let model = Model::quadratic(surplus());
    let mut group = c.benchmark_group("integrate_10k_steps");
    for method in [Method::Euler, Method::Rk4] {
        let cfg = IntegratorConfig::new(method, 1e-3, 10.0);
        group.bench_function(format!("{method:?}"), |b| {
            b.iter(|| integrate(black_box(5.0), &model, &cfg).unwrap())
        });
    }
    group.finish();
}

fn bench_closed_form(c: &mut Criterion) {
    let deficit = ModelParams::from_gamma(0.125, -12.5).unwrap();
    let composite = compose(10.0, &deficit, 2.0).unwrap();
    c.bench_function("composite_eval_1k", |b| {
        b.iter(|| {
            (0..1000)
                .map(|i| composite.eval(black_box(i as f64 * 2e-3)).unwrap())
                .sum::<f64>()
        })
    });
}

fn bench_sweep(c: &mut Criterion) {
    let spec = SweepSpec {
        varying: SweepParam::B0,
        values: (0..32).map(|i| i as f64).collect(),
        base: Model::quadratic(surplus()),
        b0: 0.0,
        outputs: vec![SweepOutput::FixedPoint, SweepOutput::FinalB],
        integrator: Some(IntegratorConfig::new(Method::Rk4, 1e-3, 4.0)),
    };
    c.bench_function("sweep_32_rows", |b| b.iter(|| sweep(black_box(&spec)).unwrap()));
}

criterion_group!(benches, bench_integrators, bench_closed_form, bench_sweep);
criterion_main!(benches);
