use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use hefdiv_bench::{bezout_problem, br_matrix, koszul_row};
use hefdiv_core::complexes::{affine_slice, build_buchsbaum_rim, build_koszul, BuildOptions};
use hefdiv_core::division::{solve_with_bound, BoundMethod};
use hefdiv_core::hefer::{build_hefer_tower, homogenize_tower};
use hefdiv_core::quadrature::{fubini_study_mass, reproducing_check, QuadratureSpec};
use hefdiv_core::Poly;
use num_complex::Complex64;

fn complexes(c: &mut Criterion) {
    let opts = BuildOptions::default();
    let p = koszul_row();
    c.bench_function("koszul n=2 m=3", |b| b.iter(|| build_koszul(black_box(&p), &opts).unwrap()));
    let q = br_matrix();
    c.bench_function("buchsbaum-rim r=2 m=3", |b| {
        b.iter(|| build_buchsbaum_rim(black_box(&q), &opts).unwrap())
    });
}

fn towers(c: &mut Criterion) {
    let opts = BuildOptions::default();
    let k = build_koszul(&koszul_row(), &opts).unwrap();
    let ka = affine_slice(&k).unwrap();
    c.bench_function("hefer koszul affine", |b| b.iter(|| build_hefer_tower(black_box(&ka)).unwrap()));
    let t = build_hefer_tower(&ka).unwrap();
    c.bench_function("hefer koszul homogenize", |b| b.iter(|| homogenize_tower(black_box(&t), &k).unwrap()));
    let br = build_buchsbaum_rim(&br_matrix(), &opts).unwrap();
    let bra = affine_slice(&br).unwrap();
    c.bench_function("hefer buchsbaum-rim affine", |b| b.iter(|| build_hefer_tower(black_box(&bra)).unwrap()));
}

fn division(c: &mut Criterion) {
    let prob = bezout_problem();
    c.bench_function("solve macaulay bezout", |b| {
        b.iter(|| solve_with_bound(black_box(&prob), BoundMethod::Macaulay).unwrap())
    });
}

fn quadrature(c: &mut Criterion) {
    let spec = QuadratureSpec::new(32, 1e-6);
    c.bench_function("fs mass P1", |b| b.iter(|| fubini_study_mass(1, black_box(&spec)).unwrap()));
    let phi = Poly::var(2, 1);
    let z = [Complex64::new(0.5, 0.0)];
    c.bench_function("reproduce P1 linear", |b| b.iter(|| reproducing_check(&phi, black_box(&z), &spec).unwrap()));
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = complexes, towers, division, quadrature
}
criterion_main!(benches);
