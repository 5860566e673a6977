use amplify_bench::{cycle_product, k5_product};
use amplify_core::lifting::{split_operator, verify_tensor_structure};
use amplify_core::rpp::zigzag_spectral_checks;
use criterion::{criterion_group, criterion_main, Criterion};

fn zigzag(c: &mut Criterion) {
    let p = k5_product();
    c.bench_function("zigzag checks, K5 x F2^4", |b| b.iter(|| zigzag_spectral_checks(&p).unwrap()));
    let p = cycle_product(64);
    c.bench_function("zigzag checks, Z64 x F2^2", |b| b.iter(|| zigzag_spectral_checks(&p).unwrap()));
}

fn split(c: &mut Criterion) {
    let p = cycle_product(16);
    c.bench_function("split operator S[0,1,3]", |b| b.iter(|| split_operator(&p, 0, 1, 3).unwrap()));
    let s = split_operator(&p, 0, 1, 3).unwrap();
    c.bench_function("tensor structure S[0,1,3]", |b| b.iter(|| verify_tensor_structure(&p, &s).unwrap()));
}

criterion_group!(benches, zigzag, split);
criterion_main!(benches);
