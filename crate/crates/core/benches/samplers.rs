//! Parallel versus single-worker execution of the hot paths.
//!
//! Each group runs the same work through `par::with_workers(1, ..)` and
//! through the global pool. Building with `--no-default-features` makes both
//! variants sequential, which is the baseline for the feature flag itself.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mrcorr::ld_reference::estimate_block_corr;
use mrcorr::model::SweepStreams;
use mrcorr::rng::StreamKey;
use mrcorr::simulator::{gen_study, replicate_key, run_benchmark, FitSettings, ScenarioConfig, SimulatedStudy};
use mrcorr::{mr_corr2, par, Constraints, McmcConfig};
use std::hint::black_box;

const WORKERS: [(&str, usize); 2] = [("sequential", 1), ("parallel", 0)];

fn study(block_size: usize) -> SimulatedStudy {
    let config = ScenarioConfig {
        n_blocks: 500 / block_size,
        block_size,
        r_confounders: 10,
        ..Default::default()
    };
    gen_study(&config, &replicate_key(1, 0)).expect("study")
}

fn block_sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("block_sweep");
    for block_size in [10, 50] {
        let s = study(block_size);
        let corr = estimate_block_corr(&s.reference_panel, &s.partition, 0.1).unwrap();
        let blocks = mr_corr2::precompute_blocks(&s.dataset, &s.partition, &corr).unwrap();
        let hyper = FitSettings::default().hyper;
        let key = StreamKey::new(3, &[]);
        let start = mr_corr2::init_state(&blocks, &hyper, &mut key.sequential(0)).unwrap();
        for (label, workers) in WORKERS {
            group.bench_with_input(BenchmarkId::new(label, block_size), &workers, |b, &w| {
                let mut state = start.clone();
                let mut it = 0u64;
                b.iter(|| {
                    par::with_workers(w, || {
                        let streams = SweepStreams { key: &key, iteration: it };
                        mr_corr2::sweep(&mut state, &blocks, &hyper, &Constraints::default(), streams).unwrap();
                    });
                    it += 1;
                });
            });
        }
    }
    group.finish();
}

fn chains(c: &mut Criterion) {
    let mut group = c.benchmark_group("chains");
    group.sample_size(10);
    let s = study(10);
    let corr = estimate_block_corr(&s.reference_panel, &s.partition, 0.1).unwrap();
    let hyper = FitSettings::default().hyper;
    let config = McmcConfig {
        n_iter: 300,
        n_burnin: 100,
        thin: 1,
        n_chains: 4,
        seed: 1,
    };
    for (label, workers) in WORKERS {
        group.bench_function(label, |b| {
            b.iter(|| {
                par::with_workers(workers, || {
                    black_box(mr_corr2::run_chain2(&s.dataset, &s.partition, &corr, &hyper, &config).unwrap())
                })
            });
        });
    }
    group.finish();
}

fn replicates(c: &mut Criterion) {
    let mut group = c.benchmark_group("benchmark_replicates");
    group.sample_size(10);
    let config = ScenarioConfig {
        n1: 2000,
        n2: 2000,
        n_ref: 200,
        n_blocks: 10,
        block_size: 10,
        r_confounders: 10,
        ..Default::default()
    };
    let settings = FitSettings {
        mcmc: McmcConfig {
            n_iter: 300,
            n_burnin: 100,
            ..FitSettings::default().mcmc
        },
        ..FitSettings::default()
    };
    for (label, workers) in WORKERS {
        group.bench_function(label, |b| {
            b.iter(|| par::with_workers(workers, || black_box(run_benchmark(&config, 4, &settings, 0.05).unwrap())));
        });
    }
    group.finish();
}

fn ld_estimation(c: &mut Criterion) {
    let mut group = c.benchmark_group("ld_estimation");
    let s = study(50);
    for (label, workers) in WORKERS {
        group.bench_function(label, |b| {
            b.iter(|| {
                par::with_workers(workers, || {
                    black_box(estimate_block_corr(&s.reference_panel, &s.partition, 0.1).unwrap())
                })
            });
        });
    }
    group.finish();
}

criterion_group!(benches, block_sweep, chains, replicates, ld_estimation);
criterion_main!(benches);
