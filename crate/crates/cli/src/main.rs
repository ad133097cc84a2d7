use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use lpdomain::corpus::{generate_synthetic_corpus, ArtifactCache, GraphFamily, ResultFilter, ResultStore, SyntheticDomain, SyntheticSpec};
use lpdomain::pipeline::{
    compute_features, domain_rank_matrices, emit_report, load_corpus, rsc_seed, run_evaluation, run_pipeline,
    write_features_csv, write_rsc_csv, RunConfig,
};
use lpdomain::stats::rsc_curve;

/// Exit status when results are incomplete.
const INCOMPLETE: u8 = 2;

#[derive(Parser)]
#[command(name = "lpdomain", version, about = "Domain-aware evaluation of link prediction algorithms")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct GlobalOpts {
    /// key = value run configuration; flags take precedence
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Corpus manifest (CSV `network_id,path,domain` or JSON)
    #[arg(long, global = true)]
    manifest: Option<String>,
    /// Output directory for reports
    #[arg(long, global = true)]
    out: Option<String>,
    /// Base seed; split r uses seed + r
    #[arg(long, global = true)]
    seed: Option<String>,
    /// Worker threads (0 = one per core)
    #[arg(long, global = true)]
    workers: Option<String>,
    /// Comma-separated algorithm roster in registration order
    #[arg(long, global = true)]
    algorithms: Option<String>,
    /// External scorer `name=path-template` with `{network}` and `{seed}`
    #[arg(long = "external-scorer", global = true)]
    external_scorer: Vec<String>,
    #[arg(long = "results-dir", global = true)]
    results_dir: Option<String>,
    #[arg(long = "cache-dir", global = true)]
    cache_dir: Option<String>,
    /// Random splits per network
    #[arg(long, global = true)]
    repeats: Option<String>,
    /// auto, exact or sampled[:N]
    #[arg(long, global = true)]
    auc: Option<String>,
    /// Hyperparameter grid: full or reduced
    #[arg(long, global = true)]
    grid: Option<String>,
    /// Metric used for ranking: auc, precision, aupr or ndcg
    #[arg(long, global = true)]
    metric: Option<String>,
    #[arg(long, global = true)]
    permutations: Option<String>,
    #[arg(long = "rsc-trials", global = true)]
    rsc_trials: Option<String>,
    #[arg(long = "rsc-threshold", global = true)]
    rsc_threshold: Option<String>,
    /// Stop after this many evaluation tasks
    #[arg(long = "max-tasks", global = true)]
    max_tasks: Option<String>,
}

impl GlobalOpts {
    fn run_config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::from_file(p).with_context(|| format!("reading {}", p.display()))?,
            None => RunConfig::default(),
        };
        let flags = [
            ("manifest", &self.manifest),
            ("out", &self.out),
            ("seed", &self.seed),
            ("workers", &self.workers),
            ("algorithms", &self.algorithms),
            ("results-dir", &self.results_dir),
            ("cache-dir", &self.cache_dir),
            ("repeats", &self.repeats),
            ("auc", &self.auc),
            ("grid", &self.grid),
            ("metric", &self.metric),
            ("permutations", &self.permutations),
            ("rsc-trials", &self.rsc_trials),
            ("rsc-threshold", &self.rsc_threshold),
            ("max-tasks", &self.max_tasks),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.apply(key, v).with_context(|| format!("--{key}"))?;
            }
        }
        for e in &self.external_scorer {
            cfg.apply("external-scorer", e)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Parse every network and cache its canonical largest component
    Ingest,
    /// Topology features of every network (features.csv)
    Features,
    /// Run the split/train/score/evaluate tasks missing from the result store
    Evaluate,
    /// Consistency, Winner Scores, PCA, permutation test and RSC curves
    Stats,
    /// Ranking stability curves only
    Rsc {
        /// Restrict to one domain
        #[arg(long)]
        domain: Option<String>,
    },
    /// Write the report bundle and print the summary
    Report,
    /// Query stored results
    Query {
        #[arg(long = "filter-domain")]
        domain: Option<String>,
        #[arg(long = "filter-algorithm")]
        algorithm: Option<String>,
        #[arg(long = "filter-network")]
        network: Option<String>,
        #[arg(long = "filter-metric")]
        metric: Option<String>,
    },
    /// Generate a synthetic corpus
    Synth {
        /// `NAME:COUNT:FAMILY`, e.g. `social:20:hk:n=100,m=3,pt=0.8`
        #[arg(long = "domain", required = true)]
        domains: Vec<String>,
    },
    /// ingest, features, evaluate, stats and report in one go
    Run,
}

fn parse_synth_domain(s: &str) -> Result<SyntheticDomain> {
    let mut parts = s.splitn(3, ':');
    let (Some(name), Some(count), Some(family)) = (parts.next(), parts.next(), parts.next()) else {
        bail!("domain `{s}` is not of the form NAME:COUNT:FAMILY");
    };
    Ok(SyntheticDomain {
        name: name.to_string(),
        count: count.parse().with_context(|| format!("count in `{s}`"))?,
        family: GraphFamily::parse(family)?,
    })
}

fn ingest(cfg: &RunConfig) -> Result<u8> {
    let corpus = load_corpus(&cfg.manifest)?;
    let cache = ArtifactCache::new(&cfg.cache_dir())?;
    fs::create_dir_all(&cfg.out_dir)?;
    let path = cfg.out_dir.join("ingest.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["network_id", "domain", "nodes", "edges", "lcc_nodes", "lcc_edges", "content_hash"])?;
    for (e, g) in corpus.manifest.entries.iter().zip(&corpus.graphs) {
        cache.store_lcc(g)?;
        let lcc = g.largest_connected_component();
        w.write_record([
            e.network_id.clone(),
            e.domain.clone(),
            g.node_count().to_string(),
            g.edge_count().to_string(),
            lcc.node_count().to_string(),
            lcc.edge_count().to_string(),
            g.content_hash(),
        ])?;
    }
    w.flush()?;
    for (d, n) in corpus.manifest.domain_counts() {
        println!("{d}: {n} networks");
    }
    println!("wrote {}", path.display());
    Ok(0)
}

fn features(cfg: &RunConfig) -> Result<u8> {
    let corpus = load_corpus(&cfg.manifest)?;
    let cache = ArtifactCache::new(&cfg.cache_dir())?;
    fs::create_dir_all(&cfg.out_dir)?;
    let feats = lpdomain::par::with_workers(cfg.workers, || compute_features(&corpus, Some(&cache), cfg.eval.seed_base));
    let path = cfg.out_dir.join("features.csv");
    write_features_csv(&path, &corpus, &feats)?;
    println!("wrote {}", path.display());
    Ok(if feats.iter().any(|f| f.is_err()) { INCOMPLETE } else { 0 })
}

fn evaluate(cfg: &RunConfig) -> Result<u8> {
    let corpus = load_corpus(&cfg.manifest)?;
    let store = ResultStore::open(&cfg.results_dir())?;
    let cache = ArtifactCache::new(&cfg.cache_dir())?;
    fs::write(cfg.results_dir().join("config.txt"), cfg.snapshot())?;
    let summary = run_evaluation(cfg, &corpus, &store, &cache)?;
    let table = store.consolidate()?;
    println!(
        "{} tasks: {} already stored, {} run, {} failed, {} deferred",
        summary.total,
        summary.skipped,
        summary.executed,
        summary.failures.len(),
        summary.deferred
    );
    for f in &summary.failures {
        eprintln!("failed: {} / {} / seed {}: {}", f.network, f.algorithm, f.seed, f.error);
    }
    println!("wrote {}", table.display());
    Ok(if summary.failures.is_empty() && summary.deferred == 0 { 0 } else { INCOMPLETE })
}

fn stats(cfg: &RunConfig, print_summary: bool) -> Result<u8> {
    let corpus_manifest = lpdomain::corpus::load_manifest(&cfg.manifest)?;
    let store = ResultStore::open(&cfg.results_dir())?;
    let bundle = lpdomain::par::with_workers(cfg.workers, || emit_report(&store, &corpus_manifest, cfg, &cfg.out_dir))?;
    if print_summary {
        print!("{}", fs::read_to_string(cfg.out_dir.join("summary.txt"))?);
    } else {
        for f in &bundle.files {
            println!("wrote {}", f.display());
        }
    }
    if !bundle.is_complete() {
        eprintln!("{} (network, algorithm) cells are incomplete; see gaps.csv", bundle.gaps.len());
        return Ok(INCOMPLETE);
    }
    Ok(0)
}

fn rsc(cfg: &RunConfig, domain: Option<&str>) -> Result<u8> {
    let manifest = lpdomain::corpus::load_manifest(&cfg.manifest)?;
    let store = ResultStore::open(&cfg.results_dir())?;
    let (matrices, gaps) = domain_rank_matrices(&store, &manifest, cfg)?;
    if let Some(d) = domain {
        if !manifest.domains().iter().any(|x| x == d) {
            bail!("unknown domain `{d}`");
        }
    }
    fs::create_dir_all(&cfg.out_dir)?;
    for p in matrices.iter().filter(|p| domain.is_none_or(|d| p.domain() == d)) {
        if p.len() < 2 {
            println!("{}: fewer than two complete networks, skipped", p.domain());
            continue;
        }
        let curve = lpdomain::par::with_workers(cfg.workers, || {
            rsc_curve(p, cfg.rsc_trials, rsc_seed(cfg.eval.seed_base, p.domain()), cfg.rsc_threshold)
        })?;
        let path = write_rsc_csv(&cfg.out_dir, &curve)?;
        match curve.saturation_size() {
            Some(l) => println!("{}: L* = {l} of {} ({})", p.domain(), p.len(), path.display()),
            None => println!("{}: threshold not reached ({})", p.domain(), path.display()),
        }
    }
    Ok(if gaps.is_empty() { 0 } else { INCOMPLETE })
}

fn query(cfg: &RunConfig, filter: ResultFilter) -> Result<u8> {
    let manifest = lpdomain::corpus::load_manifest(&cfg.manifest).ok();
    let store = ResultStore::open(&cfg.results_dir())?;
    let q = store.query_results(&filter, manifest.as_ref());
    if q.unknown {
        eprintln!("warning: a filter names an id not present in the store or manifest");
    }
    let mut w = csv::Writer::from_writer(std::io::stdout());
    w.write_record(["network", "algorithm", "seed", "metric", "value"])?;
    for r in &q.records {
        w.write_record([r.network.clone(), r.algorithm.clone(), r.seed.to_string(), r.metric.clone(), r.value.to_string()])?;
    }
    w.flush()?;
    Ok(0)
}

fn synth(cfg: &RunConfig, domains: &[String]) -> Result<u8> {
    let spec = SyntheticSpec {
        domains: domains.iter().map(|d| parse_synth_domain(d)).collect::<Result<_>>()?,
        seed: cfg.eval.seed_base,
    };
    let dir: &Path = &cfg.out_dir;
    let manifest = generate_synthetic_corpus(&spec, dir)?;
    println!("wrote {} networks and {}", manifest.entries.len(), dir.join("manifest.csv").display());
    Ok(0)
}

fn run(cfg: &RunConfig) -> Result<u8> {
    let outcome = run_pipeline(cfg)?;
    let e = &outcome.evaluation;
    println!(
        "{} tasks: {} already stored, {} run, {} failed, {} deferred",
        e.total,
        e.skipped,
        e.executed,
        e.failures.len(),
        e.deferred
    );
    print!("{}", fs::read_to_string(cfg.out_dir.join("summary.txt"))?);
    Ok(if outcome.is_complete() { 0 } else { INCOMPLETE })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = cli.global.run_config().and_then(|cfg| match &cli.command {
        Command::Ingest => ingest(&cfg),
        Command::Features => features(&cfg),
        Command::Evaluate => evaluate(&cfg),
        Command::Stats => stats(&cfg, false),
        Command::Rsc { domain } => rsc(&cfg, domain.as_deref()),
        Command::Report => stats(&cfg, true),
        Command::Query {
            domain,
            algorithm,
            network,
            metric,
        } => query(
            &cfg,
            ResultFilter {
                domain: domain.clone(),
                algorithm: algorithm.clone(),
                network: network.clone(),
                metric: metric.clone(),
            },
        ),
        Command::Synth { domains } => synth(&cfg, domains),
        Command::Run => run(&cfg),
    });
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
