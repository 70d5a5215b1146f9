use criterion::{black_box, criterion_group, criterion_main, Criterion};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use privbandit::env::run_episode;
use privbandit::mechanism::Mechanism;
use privbandit::policy::{ldp_pipeline, Policy};
use privbandit::Environment;

fn bench_episodes(c: &mut Criterion) {
    let env = Environment::bernoulli(&[0.7, 0.3]).unwrap();
    let ucb = Policy::ucb1(1.0).unwrap();
    c.bench_function("ucb1 episode T=10000", |b| {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        b.iter(|| {
            let ep = run_episode(black_box(&ucb), &env, 10_000, &mut rng).unwrap();
            black_box(ep.history.len())
        })
    });

    let rr = Mechanism::randomized_response(1.0).unwrap();
    let ldp = ldp_pipeline(&ucb, &rr).unwrap();
    c.bench_function("ldp-ucb episode T=10000", |b| {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        b.iter(|| {
            let ep = run_episode(black_box(&ldp), &env, 10_000, &mut rng).unwrap();
            black_box(ep.history.len())
        })
    });
}

criterion_group!(benches, bench_episodes);
criterion_main!(benches);
