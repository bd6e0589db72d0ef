use criterion::{criterion_group, criterion_main, Criterion};
use modfun::cohft::cohft_integral;
use modfun::intersect::{clear_cache, psi_intersection};
use modfun::toprec::{curve_from_cohft, default_trunc, tr_run, xi_decompose};
use modfun::Tolerance;
use modfun_bench::{su2, t_one};
use std::hint::black_box;

fn bench_psi(c: &mut Criterion) {
    c.bench_function("psi_intersection cold <tau_10>_4", |b| {
        b.iter(|| {
            clear_cache();
            black_box(psi_intersection(4, &[10]).unwrap())
        })
    });
    c.bench_function("psi_intersection memoized <tau_10>_4", |b| {
        let _ = psi_intersection(4, &[10]).unwrap();
        b.iter(|| black_box(psi_intersection(4, &[10]).unwrap()))
    });
}

fn bench_tr(c: &mut Criterion) {
    let mf = su2(2);
    let t = t_one();
    c.bench_function("tr_run su2:2 t=1 (1,2)", |b| {
        let curve = curve_from_cohft(&mf, &t, default_trunc(1, 2)).unwrap();
        b.iter(|| black_box(tr_run(&curve, 1, 2).unwrap()))
    });
    c.bench_function("xi_decompose su2:2 t=1 (1,2)", |b| {
        let curve = curve_from_cohft(&mf, &t, default_trunc(1, 2)).unwrap();
        let omega = tr_run(&curve, 1, 2).unwrap();
        b.iter(|| black_box(xi_decompose(&omega, &curve, Tolerance::default()).unwrap()))
    });
}

fn bench_cohft(c: &mut Criterion) {
    let mf = su2(2);
    let t = t_one();
    c.bench_function("cohft_integral su2:2 t=1 (2,1) d=4", |b| {
        let _ = psi_intersection(2, &[4]); // warm the cache like a real run
        b.iter(|| black_box(cohft_integral(&mf, &t, 2, &[0], &[4]).unwrap()))
    });
}

criterion_group!(benches, bench_psi, bench_tr, bench_cohft);
criterion_main!(benches);
