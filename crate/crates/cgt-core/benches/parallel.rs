//! Sequential vs data-parallel throughput for the subset verifiers and the
//! two-stage trial simulations, plus the exponent search on a mid-size
//! target. Build with default features to get both execution modes; with
//! `--no-default-features` only the sequential rows run.

use criterion::{criterion_group, criterion_main, Criterion};
use num_bigint::BigUint;

use cgt_core::crs::{build_crs_matrix, optimize_plan, select_prime_plan};
use cgt_core::rw::{RwParams, TrialBatch, TrialOptions};
use cgt_core::verify::{is_d_disjunct_with, is_dk_resolvable_with, VerifyOptions};

fn opts(parallel: bool) -> VerifyOptions {
    VerifyOptions {
        force: false,
        parallel,
    }
}

fn bench_disjunct_verify(c: &mut Criterion) {
    let plan = select_prime_plan(&BigUint::from(64u32), 3).unwrap();
    let m = build_crs_matrix(64, &plan).unwrap();
    let mut group = c.benchmark_group("disjunct_verify_n64_d3");
    group.bench_function("sequential", |b| {
        b.iter(|| is_d_disjunct_with(&m, 3, opts(false)).unwrap())
    });
    #[cfg(feature = "parallel")]
    group.bench_function("parallel", |b| {
        b.iter(|| is_d_disjunct_with(&m, 3, opts(true)).unwrap())
    });
    group.finish();
}

fn bench_resolvable_verify(c: &mut Criterion) {
    let params = RwParams::sized(48, 2, 2, 17).unwrap();
    let m = cgt_core::rw::build_rw_matrix(&params).unwrap();
    let mut group = c.benchmark_group("resolvable_verify_n48_d2k2");
    group.bench_function("sequential", |b| {
        b.iter(|| is_dk_resolvable_with(&m, 2, 2, opts(false)).unwrap())
    });
    #[cfg(feature = "parallel")]
    group.bench_function("parallel", |b| {
        b.iter(|| is_dk_resolvable_with(&m, 2, 2, opts(true)).unwrap())
    });
    group.finish();
}

fn bench_two_stage_trials(c: &mut Criterion) {
    let batch = TrialBatch {
        params: RwParams::sized(256, 4, 4, 0).unwrap(),
        base_seed: 1,
        trials: 64,
    };
    let mut group = c.benchmark_group("two_stage_trials_n256_x64");
    group.bench_function("sequential", |b| {
        b.iter(|| batch.run_random(4, TrialOptions { parallel: false }).unwrap())
    });
    #[cfg(feature = "parallel")]
    group.bench_function("parallel", |b| {
        b.iter(|| batch.run_random(4, TrialOptions { parallel: true }).unwrap())
    });
    group.finish();
}

fn bench_exponent_search(c: &mut Criterion) {
    let n = BigUint::from(10u32).pow(10u32);
    let plan = select_prime_plan(&n, 5).unwrap();
    c.bench_function("exponent_search_1e10_d5", |b| {
        b.iter(|| optimize_plan(&plan).unwrap())
    });
}

criterion_group!(
    benches,
    bench_disjunct_verify,
    bench_resolvable_verify,
    bench_two_stage_trials,
    bench_exponent_search
);
criterion_main!(benches);
