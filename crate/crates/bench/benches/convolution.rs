use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hplattice::atoms::{generate_atom, AtomParams};
use hplattice::operators::LatticeOperator;
use hplattice::{Backend, DiscreteCube, LatticePoint, Window};

fn potential(c: &mut Criterion) {
    let params = AtomParams::new(0.8, 2.0, 1).unwrap();
    let atom = generate_atom(&DiscreteCube::centered(LatticePoint::origin(2), 4), params, 11).unwrap();
    let op = LatticeOperator::Potential { alpha: 0.5 };
    let mut group = c.benchmark_group("riesz_potential_2d");
    group.sample_size(10);
    for radius in [32u64, 64, 128] {
        let out = Window::centered(&LatticePoint::origin(2), radius);
        for backend in [Backend::Direct, Backend::Fast] {
            let plan = op.plan(atom.data.window().clone(), out.clone(), backend).unwrap();
            group.bench_with_input(BenchmarkId::new(format!("{backend:?}"), radius), &plan, |b, plan| {
                b.iter(|| plan.apply(black_box(&atom.data)).unwrap())
            });
        }
    }
    group.finish();
}

fn plan_construction(c: &mut Criterion) {
    let input = Window::centered(&LatticePoint::origin(2), 8);
    let out = Window::centered(&LatticePoint::origin(2), 128);
    c.bench_function("fast_plan_2d_r128", |b| {
        b.iter(|| {
            LatticeOperator::Riesz { axis: 1 }
                .plan(black_box(input.clone()), out.clone(), Backend::Fast)
                .unwrap()
        })
    });
}

criterion_group!(benches, potential, plan_construction);
criterion_main!(benches);
