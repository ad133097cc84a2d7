mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use lpdomain::corpus::{
    generate_synthetic_corpus, GraphFamily, ResultRecord, ResultStore, SyntheticDomain, SyntheticSpec, RESULTS_LOG,
};
use lpdomain::graph::label_order;
use lpdomain::pipeline::{run_pipeline, RunConfig};
use lpdomain::split::EvalConfig;

fn corpus(dir: &Path, domains: &[(&str, GraphFamily, usize)]) -> std::path::PathBuf {
    let spec = SyntheticSpec {
        domains: domains
            .iter()
            .map(|(name, family, count)| SyntheticDomain {
                name: name.to_string(),
                family: family.clone(),
                count: *count,
            })
            .collect(),
        seed: 21,
    };
    generate_synthetic_corpus(&spec, &dir.join("corpus")).unwrap();
    dir.join("corpus/manifest.csv")
}

fn config(manifest: &Path, out: &Path, algorithms: &[&str]) -> RunConfig {
    RunConfig {
        manifest: manifest.to_path_buf(),
        out_dir: out.to_path_buf(),
        algorithms: algorithms.iter().map(|s| s.to_string()).collect(),
        eval: EvalConfig {
            repeats: 3,
            seed_base: 5,
            ..Default::default()
        },
        permutations: 300,
        rsc_trials: 30,
        ..RunConfig::default()
    }
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

#[test]
fn complete_run_writes_every_declared_file() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = corpus(
        dir.path(),
        &[
            ("alpha", GraphFamily::WattsStrogatz { n: 40, k: 4, p: 0.2 }, 4),
            ("beta", GraphFamily::BarabasiAlbert { n: 40, m: 2 }, 4),
        ],
    );
    let out = dir.path().join("out");
    let cfg = config(&manifest, &out, &["RA", "RA3", "MFI"]);
    let run = run_pipeline(&cfg).unwrap();
    assert!(run.is_complete());
    assert_eq!(run.evaluation.total, 8 * 3 * 3);
    for f in [
        "features.csv",
        "mean_metrics.csv",
        "ranks.csv",
        "consistency.csv",
        "winner_scores.csv",
        "pca_coords.csv",
        "pca_variance.csv",
        "permutation.csv",
        "rsc_alpha.csv",
        "rsc_beta.csv",
        "gaps.csv",
        "results/results.csv",
    ] {
        let (header, rows) = read_csv(&out.join(f));
        assert!(!header.is_empty(), "{f}");
        if f != "gaps.csv" {
            assert!(!rows.is_empty(), "{f} has no rows");
        } else {
            assert!(rows.is_empty());
        }
    }
    let (header, rows) = read_csv(&out.join("features.csv"));
    assert_eq!(
        header,
        ["network_id", "domain", "diameter", "entropy", "clustering", "modularity", "avg_distance", "density", "estimated_flags"]
    );
    assert_eq!(rows.len(), 8);
    let (_, results) = read_csv(&out.join("results/results.csv"));
    assert_eq!(results.len(), 8 * 3 * 3 * 4);
    let metrics: BTreeSet<&str> = results.iter().map(|r| r[3].as_str()).collect();
    assert_eq!(metrics, BTreeSet::from(["auc", "aupr", "ndcg", "precision"]));
    let (_, consistency) = read_csv(&out.join("consistency.csv"));
    assert_eq!(consistency.len(), 2);
    let (_, rsc) = read_csv(&out.join("rsc_alpha.csv"));
    assert_eq!(rsc.len(), 4);
    // the full-domain sample is the reference itself
    let curve = run.report.rsc.iter().find(|c| c.domain == "alpha").unwrap();
    let self_tau = lpdomain::stats::kendall_tau(&curve.reference, &curve.reference).unwrap();
    assert_eq!(rsc[3][1].parse::<f64>().unwrap(), self_tau);
    assert!(fs::read_to_string(out.join("summary.txt")).unwrap().contains("coverage: complete"));
    let snapshot = RunConfig::from_file(&out.join("results/config.txt")).unwrap();
    assert_eq!(snapshot, cfg);

    let again = run_pipeline(&cfg).unwrap();
    assert_eq!(again.evaluation.executed, 0);
    assert_eq!(again.evaluation.skipped, run.evaluation.total);
}

#[test]
fn single_domain_gives_one_by_one_consistency() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = corpus(dir.path(), &[("only", GraphFamily::ErdosRenyi { n: 30, p: 0.2 }, 5)]);
    let out = dir.path().join("out");
    let mut cfg = config(&manifest, &out, &["RA", "RA3"]);
    cfg.features = false;
    let run = run_pipeline(&cfg).unwrap();
    assert!(run.is_complete());
    let (header, rows) = read_csv(&out.join("consistency.csv"));
    assert_eq!(header, ["domain", "only"]);
    assert_eq!(rows.len(), 1);
    assert!(run.report.permutation.is_none());
    assert_eq!(read_csv(&out.join("permutation.csv")).1.len(), 0);
}

/// Reads the exported split of one (network, seed) and writes RA scores for
/// the test pairs, computed from original labels only.
fn external_ra(split_dir: &Path, out: &Path) {
    let read = |name: &str| -> Vec<(String, String)> {
        fs::read_to_string(split_dir.join(name))
            .unwrap()
            .lines()
            .map(|l| {
                let mut it = l.split_whitespace();
                (it.next().unwrap().to_string(), it.next().unwrap().to_string())
            })
            .collect()
    };
    let mut adj: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for (a, b) in read("train.txt").into_iter().chain(read("validation.txt")) {
        adj.entry(a.clone()).or_default().insert(b.clone());
        adj.entry(b).or_default().insert(a);
    }
    let mut text = String::from("node_i,node_j,score\n");
    for (a, b) in read("probe.txt").into_iter().chain(read("negatives.txt")) {
        let empty = BTreeSet::new();
        let na = adj.get(&a).unwrap_or(&empty);
        let nb = adj.get(&b).unwrap_or(&empty);
        let mut common: Vec<&String> = na.intersection(nb).collect();
        common.sort_by(|x, y| label_order(x, y));
        let s: f64 = common.iter().map(|z| 1.0 / adj[*z].len() as f64).sum();
        text.push_str(&format!("{b},{a},{s}\n"));
    }
    fs::write(out, text).unwrap();
}

#[test]
fn external_scorer_cells_are_flagged_then_filled() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = corpus(
        dir.path(),
        &[
            ("a", GraphFamily::HolmeKim { n: 40, m: 2, triad_p: 0.7 }, 3),
            ("b", GraphFamily::ErdosRenyi { n: 40, p: 0.12 }, 3),
        ],
    );
    let out = dir.path().join("out");
    let scores = dir.path().join("scores");
    fs::create_dir_all(&scores).unwrap();
    let mut cfg = config(&manifest, &out, &["RA", "mine"]);
    cfg.features = false;
    cfg.apply(
        "external-scorer",
        &format!("mine={}/{{network}}_{{seed}}.csv", scores.display()),
    )
    .unwrap();

    let first = run_pipeline(&cfg).unwrap();
    assert!(!first.is_complete());
    assert_eq!(first.evaluation.failures.len(), 6 * 3);
    assert!(first.evaluation.failures.iter().all(|f| f.algorithm == "mine"));
    assert_eq!(first.report.gaps.len(), 6);
    assert!(first.report.rank_matrices.is_empty());
    let (_, gaps) = read_csv(&out.join("gaps.csv"));
    assert_eq!(gaps.len(), 6);
    assert!(fs::read_to_string(out.join("summary.txt")).unwrap().contains("incomplete"));

    for net in 0..3 {
        for d in ["a", "b"] {
            let id = format!("{d}_{net:03}");
            for seed in cfg.seeds() {
                let split = cfg.cache_dir().join("splits").join(&id).join(seed.to_string());
                external_ra(&split, &scores.join(format!("{id}_{seed}.csv")));
            }
        }
    }
    let second = run_pipeline(&cfg).unwrap();
    assert!(second.is_complete());
    assert_eq!(second.evaluation.executed, 6 * 3);
    let store = ResultStore::open(&cfg.results_dir()).unwrap();
    for r in store.all().iter().filter(|r| r.algorithm == "RA") {
        let ext = store.get(&r.network, "mine", r.seed, &r.metric).unwrap();
        assert_eq!(ext.to_bits(), r.value.to_bits(), "{r:?}");
    }
}

#[test]
fn parallel_appends_all_survive() {
    let dir = tempfile::tempdir().unwrap();
    let store = ResultStore::open(dir.path()).unwrap();
    std::thread::scope(|s| {
        for t in 0..8 {
            let store = &store;
            s.spawn(move || {
                for i in 0..200u64 {
                    store
                        .store_result(ResultRecord {
                            network: format!("n{t}"),
                            algorithm: "RA".into(),
                            seed: i,
                            metric: "auc".into(),
                            value: i as f64 / 7.0,
                        })
                        .unwrap();
                }
            });
        }
    });
    drop(store);
    let text = fs::read_to_string(dir.path().join(RESULTS_LOG)).unwrap();
    assert_eq!(text.lines().count(), 1600);
    let reopened = ResultStore::open(dir.path()).unwrap();
    assert_eq!(reopened.all().len(), 1600);
    assert_eq!(reopened.get("n3", "RA", 10, "auc"), Some(10.0 / 7.0));
}

#[test]
fn worker_count_does_not_change_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = corpus(
        dir.path(),
        &[
            ("p", GraphFamily::WattsStrogatz { n: 30, k: 4, p: 0.3 }, 3),
            ("q", GraphFamily::ErdosRenyi { n: 30, p: 0.2 }, 3),
        ],
    );
    let mut one = config(&manifest, &dir.path().join("one"), &["RA", "RA3", "NMF"]);
    one.grid = lpdomain::predictors::GridProfile::Reduced;
    one.workers = 1;
    let mut four = one.clone();
    four.out_dir = dir.path().join("four");
    four.workers = 4;
    run_pipeline(&one).unwrap();
    run_pipeline(&four).unwrap();
    let files = common::assert_same_csvs(&one.out_dir, &four.out_dir);
    assert!(files.len() >= 10);
}
