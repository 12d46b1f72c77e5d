use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use sel_bench::{cyclic, system, window};
use sel_core::amenable::m_value;
use sel_core::microstate::bowen::{bowen_ap_count, ApMode};
use sel_core::microstate::{n_cover, n_separated, MicrostateSpace};
use sel_core::{CoverSpec, InvariantMeasure};

fn enumerate(c: &mut Criterion) {
    let mut g = c.benchmark_group("enumerate");
    for name in ["full-shift-2", "golden-mean"] {
        let sys = system(name);
        for d in [8usize, 12] {
            let sigma = cyclic(d);
            let space = MicrostateSpace::new(&sys, &sigma, &window(&[0, 1]), 4).unwrap();
            g.bench_with_input(BenchmarkId::new(name, d), &d, |b, _| {
                b.iter(|| black_box(space.enumerate(0.25).unwrap()))
            });
        }
    }
    g.finish();
}

fn odometer(c: &mut Criterion) {
    let sys = system("odometer-2adic");
    let sigma = cyclic(128);
    let space = MicrostateSpace::new(&sys, &sigma, &window(&[0, 1]), 0).unwrap();
    c.bench_function("enumerate/odometer/128", |b| {
        b.iter(|| black_box(space.enumerate(0.0005).unwrap()))
    });
}

fn counts(c: &mut Criterion) {
    let sys = system("full-shift-2");
    let sigma = cyclic(8);
    let space = MicrostateSpace::new(&sys, &sigma, &window(&[0, 1]), 4).unwrap();
    let e = space.enumerate(0.25).unwrap();
    let (cert, opt) = (e.pessimistic(), e.optimistic());
    let std = sys.standard_partition().unwrap();
    c.bench_function("n_separated/full-shift-2/8", |b| {
        b.iter(|| black_box(n_separated(&space, &cert, &opt, 0.3, 2_000_000).unwrap()))
    });
    c.bench_function("n_cover/full-shift-2/8", |b| {
        b.iter(|| black_box(n_cover(&space, &std, &opt, 1_000_000).unwrap()))
    });
}

fn amenable(c: &mut Criterion) {
    let mut g = c.benchmark_group("m_value");
    for name in ["full-shift-2", "golden-mean"] {
        let sys = system(name);
        let shift = sys.as_shift().unwrap();
        let std = CoverSpec::standard_partition(shift);
        let whole = CoverSpec::whole(shift.group());
        for n in [12i64, 20] {
            let f = window(&(0..n).collect::<Vec<_>>());
            g.bench_with_input(BenchmarkId::new(name, n), &n, |b, _| {
                b.iter(|| black_box(m_value(shift, &std, &whole, &f).unwrap()))
            });
        }
    }
    g.finish();
}

fn bowen(c: &mut Criterion) {
    let sys = system("full-shift-2");
    let shift = sys.as_shift().unwrap();
    let alpha = CoverSpec::standard_partition(shift);
    let mu = InvariantMeasure::bernoulli2(0.5).unwrap();
    let f = window(&[0, 1]);
    let exhaustive = ApMode::Auto {
        cap: (1u64 << 24) as f64,
        samples: 10_000,
        seed: 1,
    };
    c.bench_function("bowen/exhaustive/12", |b| {
        b.iter(|| black_box(bowen_ap_count(shift, &cyclic(12), &alpha, &f, 0.5, &mu, exhaustive).unwrap()))
    });
    let sampled = ApMode::Sampled { samples: 10_000, seed: 1 };
    c.bench_function("bowen/sampled/20", |b| {
        b.iter(|| black_box(bowen_ap_count(shift, &cyclic(20), &alpha, &f, 0.5, &mu, sampled).unwrap()))
    });
}

criterion_group!(microstates, enumerate, odometer, counts);
criterion_group!(estimators, amenable, bowen);
criterion_main!(microstates, estimators);
