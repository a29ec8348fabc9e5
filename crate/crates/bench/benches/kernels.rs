use biscat_core::harness::KernelLEvaluator;
use biscat_core::specfun::{self, HankelPath};
use biscat_core::{operators, Complex64, Field, PlaneGrid, PotentialSpec};
use criterion::{black_box, criterion_group, criterion_main, Criterion};

fn hankel(c: &mut Criterion) {
    let z = Complex64::new(1.3, 0.4);
    c.bench_function("hankel_h01/series", |b| b.iter(|| specfun::hankel_h01(black_box(z), HankelPath::Series)));
    c.bench_function("hankel_h01/integral", |b| b.iter(|| specfun::hankel_h01(black_box(z), HankelPath::Integral)));
    c.bench_function("biharm_resolvent_kernel", |b| {
        b.iter(|| specfun::biharm_resolvent_kernel(black_box(0.05), black_box(0.7)))
    });
}

fn kernel_l(c: &mut Criterion) {
    let ev = KernelLEvaluator::new(0.5);
    c.bench_function("kernel_l/ibp", |b| b.iter(|| ev.eval_ibp(black_box(7.0), black_box(3.0))));
    c.bench_function("kernel_l/naive", |b| b.iter(|| ev.eval_naive(black_box(7.0), black_box(3.0))));
}

fn operators(c: &mut Criterion) {
    let p = operators::load_potential(&PotentialSpec::well(1.0, 1.0), operators::operator_grid()).unwrap();
    c.bench_function("birman_schwinger/lambda=0.05", |b| b.iter(|| operators::birman_schwinger(black_box(0.05), &p)));

    let g = PlaneGrid::new(256, 16.0).unwrap();
    let u = Field { grid: g, data: (0..g.len()).map(|i| Complex64::new((i as f64).sin(), 0.0)).collect() };
    c.bench_function("radial_multiplier/256", |b| b.iter(|| u.apply_radial(|t| Complex64::new(1.0 / (1.0 + t * t), 0.0))));
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = hankel, kernel_l, operators
}
criterion_main!(benches);
