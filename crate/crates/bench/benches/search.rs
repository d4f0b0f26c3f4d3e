use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sparsetree::{fit, BitVector, ExactValue, SearchConfig};

fn bitvec_ops(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let a = BitVector::from_bools((0..10_000).map(|_| rng.gen_bool(0.5)));
    let b = BitVector::from_bools((0..10_000).map(|_| rng.gen_bool(0.5)));
    c.bench_function("bitvec and_count 10k", |bench| {
        bench.iter(|| black_box(&a).and_count(black_box(&b)).unwrap())
    });
    c.bench_function("bitvec and 10k", |bench| {
        bench.iter(|| black_box(&a).and(black_box(&b)).unwrap())
    });
    c.bench_function("bitvec count_ones 10k", |bench| {
        bench.iter(|| black_box(&a).count_ones())
    });
}

fn search(c: &mut Criterion) {
    let ds = sparsetree_bench::noisy_rule(1, 300, 6, 60, 0.05);
    let cfg = SearchConfig::new(ExactValue::ratio(1, 50));
    let mut group = c.benchmark_group("fit");
    group.sample_size(20);
    group.bench_function("noisy rule N=300 M=6", |bench| {
        bench.iter(|| fit(black_box(&ds), &cfg).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bitvec_ops, search);
criterion_main!(benches);
