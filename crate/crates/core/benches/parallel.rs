use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use lpdomain::corpus::{generate_synthetic_corpus, ArtifactCache, GraphFamily, ResultStore, SyntheticDomain, SyntheticSpec};
use lpdomain::pipeline::{load_corpus, run_evaluation, RunConfig};
use lpdomain::predictors::GridProfile;
use lpdomain::seed;
use lpdomain::split::EvalConfig;
use lpdomain::stats::{permutation_test, rsc_curve, PcaEmbedding, RankMatrix};
use rand::seq::SliceRandom;
use rand::Rng;

fn thread_counts() -> Vec<usize> {
    let n = std::thread::available_parallelism().map_or(1, |n| n.get());
    if n > 1 {
        vec![1, n]
    } else {
        vec![1, 2]
    }
}

fn embedding() -> PcaEmbedding {
    let mut rng = seed::rng(1, &[]);
    let mut labels = Vec::new();
    let mut coords = Vec::new();
    for d in 0..4 {
        for _ in 0..50 {
            labels.push(format!("d{d}"));
            coords.push(vec![d as f64 + rng.random::<f64>(), rng.random::<f64>()]);
        }
    }
    PcaEmbedding {
        networks: (0..labels.len()).map(|i| format!("n{i}")).collect(),
        labels,
        coords,
        explained_variance_ratio: vec![0.7, 0.3],
    }
}

fn rank_matrix() -> RankMatrix {
    let mut rng = seed::rng(2, &[]);
    let rows: Vec<Vec<u32>> = (0..60)
        .map(|_| {
            let mut r: Vec<u32> = (1..=8).collect();
            r.shuffle(&mut rng);
            r
        })
        .collect();
    RankMatrix::from_ranks(
        "d",
        (0..60).map(|i| format!("n{i}")).collect(),
        (0..8).map(|i| format!("a{i}")).collect(),
        rows,
    )
    .unwrap()
}

fn bench_stats(c: &mut Criterion) {
    let e = embedding();
    let p = rank_matrix();
    let mut group = c.benchmark_group("stats");
    group.sample_size(10);
    for t in thread_counts() {
        group.bench_with_input(BenchmarkId::new("permutation_2000", t), &t, |b, &t| {
            b.iter(|| lpdomain::par::with_workers(t, || permutation_test(black_box(&e), 2000, 7).unwrap()))
        });
        group.bench_with_input(BenchmarkId::new("rsc_200", t), &t, |b, &t| {
            b.iter(|| lpdomain::par::with_workers(t, || rsc_curve(black_box(&p), 200, 7, 0.8).unwrap()))
        });
    }
    group.finish();
}

fn bench_evaluation(c: &mut Criterion) {
    let dir = tempfile::tempdir().unwrap();
    let spec = SyntheticSpec {
        domains: vec![
            SyntheticDomain {
                name: "ba".into(),
                family: GraphFamily::BarabasiAlbert { n: 150, m: 3 },
                count: 4,
            },
            SyntheticDomain {
                name: "ws".into(),
                family: GraphFamily::WattsStrogatz { n: 150, k: 6, p: 0.1 },
                count: 4,
            },
        ],
        seed: 3,
    };
    generate_synthetic_corpus(&spec, &dir.path().join("corpus")).unwrap();
    let corpus = load_corpus(&dir.path().join("corpus/manifest.csv")).unwrap();

    let mut group = c.benchmark_group("evaluation");
    group.sample_size(10);
    for t in thread_counts() {
        group.bench_with_input(BenchmarkId::new("ra_ra3_mfi_x2", t), &t, |b, &t| {
            b.iter(|| {
                // fresh store each time so every task runs
                let run = tempfile::tempdir().unwrap();
                let cfg = RunConfig {
                    manifest: dir.path().join("corpus/manifest.csv"),
                    out_dir: run.path().to_path_buf(),
                    algorithms: vec!["RA".into(), "RA3".into(), "MFI".into()],
                    eval: EvalConfig {
                        repeats: 2,
                        ..Default::default()
                    },
                    grid: GridProfile::Reduced,
                    workers: t,
                    ..RunConfig::default()
                };
                let store = ResultStore::open(&cfg.results_dir()).unwrap();
                let cache = ArtifactCache::new(&cfg.cache_dir()).unwrap();
                run_evaluation(&cfg, &corpus, &store, &cache).unwrap()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, bench_stats, bench_evaluation);
criterion_main!(benches);
