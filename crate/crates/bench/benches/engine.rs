use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use kpotent_core::potent::enumerate_potents;
use kpotent_core::preserver::{canonicalize, verify_identity, ProbeSampler};
use kpotent_core::suite::{run_lemmas, SuiteConfig};
use kpotent_core::{certify, simplicity_witness, Closure, ExactMatrix, MapOracle, PotentContext, StructuredMap};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn field_ops(c: &mut Criterion) {
    let f = Closure::prime(5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut g = c.benchmark_group("field_mul");
    for degree in [1u32, 2, 4, 6] {
        let a = f.random_nonzero(&mut rng, degree).unwrap();
        let b = f.random_nonzero(&mut rng, degree).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(degree), &degree, |bch, _| {
            bch.iter(|| f.mul(black_box(&a), black_box(&b)).unwrap())
        });
    }
    g.finish();
}

fn mixed_product(c: &mut Criterion) {
    let f = Closure::prime(5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut g = c.benchmark_group("mixed_product_k2");
    for n in [2usize, 3, 4, 6] {
        let a = ExactMatrix::random(&f, n, 1, &mut rng).unwrap();
        let b = ExactMatrix::random(&f, n, 1, &mut rng).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |bch, _| {
            bch.iter(|| black_box(&a).mixed_product(black_box(&b), 2).unwrap())
        });
    }
    g.finish();
}

fn jordan_and_certify(c: &mut Criterion) {
    let f = Closure::prime(5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut g = c.benchmark_group("generate");
    for n in [3usize, 4] {
        let x = ExactMatrix::random(&f, n, 1, &mut rng).unwrap();
        g.bench_with_input(BenchmarkId::new("jordan_form", n), &x, |bch, x| bch.iter(|| x.jordan_form().unwrap()));
        g.bench_with_input(BenchmarkId::new("certify", n), &x, |bch, x| bch.iter(|| certify(x, 2).unwrap()));
        g.bench_with_input(BenchmarkId::new("witness", n), &x, |bch, x| {
            bch.iter(|| simplicity_witness(x, 2).unwrap())
        });
    }
    g.finish();
}

fn enumeration(c: &mut Criterion) {
    let mut g = c.benchmark_group("enumerate_potents");
    g.sample_size(10);
    for (p, m) in [(3u32, 4u32), (5, 5)] {
        let ctx = PotentContext::new(m, 2, p).unwrap();
        g.bench_function(format!("p{p}_m{m}_n2"), |bch| bch.iter(|| enumerate_potents(&ctx).unwrap()));
    }
    g.finish();
}

fn preserver(c: &mut Criterion) {
    let mut g = c.benchmark_group("preserver");
    g.sample_size(10);
    for n in [2usize, 3] {
        let f = Closure::prime(5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let map = StructuredMap::random_canonical(&f, n, 2, 2, &mut rng).unwrap();
        let oracle = MapOracle::from_structured(&f, &map).unwrap();
        let sampler = ProbeSampler::default();
        g.bench_with_input(BenchmarkId::new("verify_identity", n), &n, |bch, _| {
            bch.iter(|| verify_identity(&oracle, 2, &sampler).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("canonicalize", n), &n, |bch, &n| {
            bch.iter(|| canonicalize(&oracle, n, 2).unwrap())
        });
    }
    g.finish();
}

fn suite(c: &mut Criterion) {
    let mut g = c.benchmark_group("lemma_suite");
    g.sample_size(10);
    let cfg = SuiteConfig {
        samples: 50,
        ..SuiteConfig::default()
    };
    g.bench_function("order_and_rank_samples50", |bch| {
        bch.iter(|| run_lemmas(&cfg, &["order.transitivity", "rank.orthoadditive", "s3.b.order_preservation"]).unwrap())
    });
    g.finish();
}

criterion_group!(benches, field_ops, mixed_product, jordan_and_certify, enumeration, preserver, suite);
criterion_main!(benches);
