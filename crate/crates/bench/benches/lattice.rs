use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use k3cls_core::classify::{run_all, Reference};
use k3cls_core::discform::{disc_form, orthogonal_group_of_form};
use k3cls_core::linalg::{hnf, snf};
use k3cls_core::{automorphism_group, genus_symbol, IntMatrix, Lattice};

fn lat(rows: &[&[i64]]) -> Lattice {
    Lattice::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
}

fn normal_forms(c: &mut Criterion) {
    let m = IntMatrix::from_rows(&[
        vec![12, 5, -7, 3, 0, 9],
        vec![4, 18, 2, -6, 11, 1],
        vec![-3, 7, 20, 5, 2, -8],
        vec![6, -2, 9, 15, -4, 3],
        vec![1, 10, -5, 7, 16, 2],
        vec![8, 3, 4, -9, 6, 14],
    ]);
    c.bench_function("hnf 6x6", |b| b.iter(|| hnf(black_box(&m))));
    c.bench_function("snf 6x6", |b| b.iter(|| snf(black_box(&m))));
}

fn groups(c: &mut Criterion) {
    let l81 = lat(&[&[4, 0, 2], &[0, 4, 2], &[2, 2, 12]]);
    let a5 = lat(&[
        &[2, -1, 0, 0, 0],
        &[-1, 2, -1, 0, 0],
        &[0, -1, 2, -1, 0],
        &[0, 0, -1, 2, -1],
        &[0, 0, 0, -1, 2],
    ]);
    c.bench_function("aut rank 3", |b| b.iter(|| automorphism_group(black_box(&l81)).unwrap()));
    c.bench_function("aut A5", |b| b.iter(|| automorphism_group(black_box(&a5)).unwrap()));
}

fn forms(c: &mut Criterion) {
    let l80 = lat(&[&[4, 0, 0], &[0, 8, 0], &[0, 0, 8]]);
    let d = disc_form(&l80).unwrap();
    c.bench_function("O(q) order 256", |b| b.iter(|| orthogonal_group_of_form(black_box(&d)).unwrap()));
    let l76 = lat(&[&[4, 0, 0], &[0, 8, 0], &[0, 0, 12]]);
    c.bench_function("genus symbol", |b| b.iter(|| genus_symbol(black_box(&l76)).unwrap()));
}

fn classification(c: &mut Criterion) {
    let r = Reference::embedded();
    let mut g = c.benchmark_group("classification");
    g.sample_size(10);
    g.bench_function("run_all", |b| b.iter(|| run_all(black_box(&r), 1).unwrap()));
    g.finish();
}

criterion_group!(benches, normal_forms, groups, forms, classification);
criterion_main!(benches);
