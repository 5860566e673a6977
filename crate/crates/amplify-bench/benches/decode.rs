use amplify_bench::decode_cascade;
use amplify_core::decode::{cascade_unique_decode, fixed_poly_decode, BruteForceBackend, DecoderConfig};
use amplify_core::f2::code_bias;
use amplify_core::{Rational, Word};
use criterion::{criterion_group, criterion_main, Criterion};

fn decoders(c: &mut Criterion) {
    let cascade = decode_cascade();
    let eta = code_bias(cascade.code(cascade.depth())).unwrap();
    let m: Word = "110".parse().unwrap();
    let mut y = cascade.encode(&m).unwrap();
    for i in (0..y.len()).step_by(16) {
        y.flip(i);
    }
    c.bench_function("unique decode, 2 levels", |b| {
        b.iter(|| cascade_unique_decode(&cascade, &BruteForceBackend, &y, eta).unwrap())
    });
    let config = DecoderConfig::new((eta + Rational::new(1, 4)) / 2, eta, cascade.top_arity()).unwrap();
    c.bench_function("fixed-poly decode, 2 levels", |b| {
        b.iter(|| fixed_poly_decode(&cascade, &BruteForceBackend, &y, &config).unwrap())
    });
}

criterion_group!(benches, decoders);
criterion_main!(benches);
