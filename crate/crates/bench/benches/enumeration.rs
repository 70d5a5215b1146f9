use criterion::{black_box, criterion_group, criterion_main, Criterion};

use privbandit::audit::audit_pan_dp;
use privbandit::decomposition::{verify_kl_decomposition, verify_local_private_decomposition};
use privbandit::env::{enumerate_histories, DEFAULT_ENUMERATION_CAP};
use privbandit::mechanism::Mechanism;
use privbandit::policy::Policy;
use privbandit::Environment;

fn bench_enumeration(c: &mut Criterion) {
    c.bench_function("enumerate_histories K=3 T=3", |b| {
        b.iter(|| {
            let n = enumerate_histories(black_box(3), &[0.0, 1.0], 3, DEFAULT_ENUMERATION_CAP)
                .unwrap()
                .count();
            black_box(n)
        })
    });
}

fn bench_decomposition(c: &mut Criterion) {
    let policy = Policy::softmax(1.0).unwrap();
    let env1 = Environment::bernoulli(&[0.5, 0.5, 0.25]).unwrap();
    let env2 = Environment::bernoulli(&[0.5, 0.75, 0.25]).unwrap();
    c.bench_function("kl decomposition cell K=3 T=3", |b| {
        b.iter(|| {
            let report = verify_kl_decomposition(
                black_box(&policy),
                &env1,
                &env2,
                3,
                DEFAULT_ENUMERATION_CAP,
                1e-9,
            )
            .unwrap();
            black_box(report.slack)
        })
    });

    let mech = Mechanism::randomized_response(1.0).unwrap();
    c.bench_function("local private cell K=3 T=3", |b| {
        b.iter(|| {
            let report = verify_local_private_decomposition(
                black_box(&mech),
                &policy,
                &env1,
                &env2,
                3,
                DEFAULT_ENUMERATION_CAP,
                1e-9,
            )
            .unwrap();
            black_box(report.slack)
        })
    });
}

fn bench_audit(c: &mut Criterion) {
    let policy = Policy::softmax(5.0).unwrap();
    c.bench_function("pan audit K=2 T=3", |b| {
        b.iter(|| {
            let report = audit_pan_dp(
                black_box(&policy),
                2,
                &[0.0, 1.0],
                3,
                DEFAULT_ENUMERATION_CAP,
            )
            .unwrap();
            black_box(report.epsilon_measured)
        })
    });
}

criterion_group!(benches, bench_enumeration, bench_decomposition, bench_audit);
criterion_main!(benches);
