use criterion::{black_box, criterion_group, criterion_main, Criterion};
use venice_bench::grid_targets;
use venice_core::cherryplug::{equilibria, CherryField, DaFamily};
use venice_core::suspension::{Example, SingularSuspension};
use venice_core::{BoxBudget, BranchedIntervalMap, Half, SkewReturnMap};

fn periodic_net(c: &mut Criterion) {
    let f = BranchedIntervalMap::standard();
    let targets = grid_targets(&f, 200);
    c.bench_function("periodic_net period 20", |b| {
        b.iter(|| f.periodic_net(20, 0.005, black_box(&targets), 1e-10))
    });
    c.bench_function("preimage_tree depth 12", |b| b.iter(|| f.preimage_tree(black_box(0.3), 12)));
}

fn attractor(c: &mut Criterion) {
    let h = SkewReturnMap::default_h();
    let budget = BoxBudget::default();
    c.bench_function("attractor_half H n 8", |b| {
        b.iter(|| h.attractor_half(Half::Plus, black_box(8), &budget).unwrap())
    });
    c.bench_function("class_intersection H n 8", |b| {
        b.iter(|| h.class_intersection(black_box(8), 0.01, &budget).unwrap())
    });
}

fn dense(c: &mut Criterion) {
    let x = SingularSuspension::build_example(Example::X).unwrap();
    let mut g = c.benchmark_group("suspension");
    g.sample_size(10);
    g.bench_function("dense_periodic_check X eps 0.05", |b| {
        b.iter(|| x.dense_periodic_check(black_box(0.05), 8).unwrap())
    });
    g.bench_function("transitivity_witness X 1000 x 100", |b| b.iter(|| x.transitivity_witness(1000, 100, 7)));
    g.finish();
}

fn plug(c: &mut Criterion) {
    let f = DaFamily::new(CherryField::default()).perturb(DaFamily::DEFAULT_TAU).unwrap();
    c.bench_function("equilibria grid 64", |b| b.iter(|| equilibria(black_box(&f), 64, 1e-12).unwrap()));
}

criterion_group!(benches, periodic_net, attractor, dense, plug);
criterion_main!(benches);
