//! End-to-end runs: configuration, the resumable evaluation loop and the
//! report bundle.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use crate::corpus::{load_manifest, load_network, ArtifactCache, CorpusManifest, ResultRecord, ResultStore};
use crate::error::{Error, Result};
use crate::features::{topology_features, TopologyFeatureSet};
use crate::graph::Graph;
use crate::metrics::{LabeledScores, MetricReport, METRIC_NAMES};
use crate::predictors::{ingest_external_scores, GridProfile, NativeAlgorithm};
use crate::split::{make_split, repeat_seed, traverse_hyperparameters, AucSetting, EvalConfig};
use crate::stats::{
    build_rank_matrix, consistency_matrix, pca_embed, permutation_test, rsc_curve, winner_scores, PcaEmbedding,
    PermutationResult, RankMatrix, RscCurve, WinnerScoreTable, DEFAULT_PERMUTATIONS, DEFAULT_RSC_THRESHOLD,
    DEFAULT_RSC_TRIALS,
};
use crate::{par, seed};

// ---------------------------------------------------------------------------
// Configuration

/// An external scorer: score files are looked up by substituting `{network}`
/// and `{seed}` in the template.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExternalScorer {
    pub name: String,
    pub template: String,
}

impl ExternalScorer {
    /// Parses `name=template`.
    pub fn parse(s: &str) -> Result<Self> {
        let (name, template) = s
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("external scorer `{s}` is not of the form name=template")))?;
        let (name, template) = (name.trim(), template.trim());
        if name.is_empty() || template.is_empty() {
            return Err(Error::Config(format!("external scorer `{s}` has an empty name or template")));
        }
        if NativeAlgorithm::from_id(name).is_some() {
            return Err(Error::Config(format!("external scorer name `{name}` clashes with a native algorithm")));
        }
        Ok(ExternalScorer {
            name: name.to_string(),
            template: template.to_string(),
        })
    }

    pub fn resolve(&self, network: &str, seed: u64) -> PathBuf {
        PathBuf::from(
            self.template
                .replace("{network}", network)
                .replace("{seed}", &seed.to_string()),
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Algorithm {
    Native(NativeAlgorithm),
    External(ExternalScorer),
}

impl Algorithm {
    pub fn name(&self) -> &str {
        match self {
            Algorithm::Native(a) => a.id(),
            Algorithm::External(e) => &e.name,
        }
    }
}

/// Everything a run needs. Mirrors the CLI flags; see [`RunConfig::apply`]
/// for the key names.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub manifest: PathBuf,
    /// Algorithm names in registration order; empty means every native
    /// algorithm followed by every external scorer.
    pub algorithms: Vec<String>,
    pub external_scorers: Vec<ExternalScorer>,
    pub eval: EvalConfig,
    /// Worker threads; 0 picks one per core.
    pub workers: usize,
    pub out_dir: PathBuf,
    pub results_dir: Option<PathBuf>,
    pub cache_dir: Option<PathBuf>,
    pub grid: GridProfile,
    /// Metric used to rank algorithms.
    pub rank_metric: String,
    pub permutations: usize,
    pub rsc_trials: usize,
    pub rsc_threshold: f64,
    pub pca_components: usize,
    pub features: bool,
    /// Stop after this many evaluation tasks (for staged runs).
    pub max_tasks: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            manifest: PathBuf::from("manifest.csv"),
            algorithms: Vec::new(),
            external_scorers: Vec::new(),
            eval: EvalConfig::default(),
            workers: 0,
            out_dir: PathBuf::from("out"),
            results_dir: None,
            cache_dir: None,
            grid: GridProfile::Full,
            rank_metric: "auc".to_string(),
            permutations: DEFAULT_PERMUTATIONS,
            rsc_trials: DEFAULT_RSC_TRIALS,
            rsc_threshold: DEFAULT_RSC_THRESHOLD,
            pca_components: 3,
            features: true,
            max_tasks: None,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("`{key}`: cannot parse `{value}`")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(Error::Config(format!("`{key}`: expected a boolean, got `{value}`"))),
    }
}

pub fn parse_auc_setting(value: &str) -> Result<AucSetting> {
    let v = value.trim().to_ascii_lowercase();
    match v.as_str() {
        "auto" => Ok(AucSetting::Auto),
        "exact" => Ok(AucSetting::Exact),
        _ => match v.strip_prefix("sampled") {
            Some("") => Ok(AucSetting::Sampled(crate::metrics::DEFAULT_AUC_SAMPLES)),
            Some(rest) => Ok(AucSetting::Sampled(parse_num("auc", rest.trim_start_matches([':', '=']))?)),
            None => Err(Error::Config(format!("unknown AUC mode `{value}`"))),
        },
    }
}

fn auc_setting_str(a: AucSetting) -> String {
    match a {
        AucSetting::Auto => "auto".to_string(),
        AucSetting::Exact => "exact".to_string(),
        AucSetting::Sampled(n) => format!("sampled:{n}"),
    }
}

impl RunConfig {
    /// Reads a `key = value` file on top of the defaults. Blank lines and
    /// lines starting with `#` are skipped; `external-scorer` may repeat.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = RunConfig::default();
        cfg.apply_text(&text)?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", no + 1)))?;
            self.apply(k.trim(), v.trim())
                .map_err(|e| Error::Config(format!("line {}: {e}", no + 1)))?;
        }
        Ok(())
    }

    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        let path = || PathBuf::from(value);
        match key.replace('_', "-").to_ascii_lowercase().as_str() {
            "manifest" => self.manifest = path(),
            "out" => self.out_dir = path(),
            "results-dir" => self.results_dir = Some(path()),
            "cache-dir" => self.cache_dir = Some(path()),
            "seed" => self.eval.seed_base = parse_num(key, value)?,
            "workers" => self.workers = parse_num(key, value)?,
            "algorithms" => {
                self.algorithms = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(String::from)
                    .collect()
            }
            "external-scorer" => {
                let s = ExternalScorer::parse(value)?;
                self.external_scorers.retain(|e| e.name != s.name);
                self.external_scorers.push(s);
            }
            "repeats" => self.eval.repeats = parse_num(key, value)?,
            "auc" => self.eval.auc = parse_auc_setting(value)?,
            "grid" => self.grid = value.parse()?,
            "metric" => self.rank_metric = value.to_string(),
            "permutations" => self.permutations = parse_num(key, value)?,
            "rsc-trials" => self.rsc_trials = parse_num(key, value)?,
            "rsc-threshold" => self.rsc_threshold = parse_num(key, value)?,
            "pca-components" => self.pca_components = parse_num(key, value)?,
            "features" => self.features = parse_bool(key, value)?,
            "max-tasks" => self.max_tasks = Some(parse_num(key, value)?),
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// The configuration as a `key = value` file that [`RunConfig::from_file`]
    /// reads back.
    pub fn snapshot(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "manifest = {}", self.manifest.display());
        let _ = writeln!(s, "out = {}", self.out_dir.display());
        if let Some(d) = &self.results_dir {
            let _ = writeln!(s, "results-dir = {}", d.display());
        }
        if let Some(d) = &self.cache_dir {
            let _ = writeln!(s, "cache-dir = {}", d.display());
        }
        let _ = writeln!(s, "seed = {}", self.eval.seed_base);
        let _ = writeln!(s, "workers = {}", self.workers);
        if !self.algorithms.is_empty() {
            let _ = writeln!(s, "algorithms = {}", self.algorithms.join(","));
        }
        for e in &self.external_scorers {
            let _ = writeln!(s, "external-scorer = {}={}", e.name, e.template);
        }
        let _ = writeln!(s, "repeats = {}", self.eval.repeats);
        let _ = writeln!(s, "auc = {}", auc_setting_str(self.eval.auc));
        let grid = match self.grid {
            GridProfile::Full => "full",
            GridProfile::Reduced => "reduced",
        };
        let _ = writeln!(s, "grid = {grid}");
        let _ = writeln!(s, "metric = {}", self.rank_metric);
        let _ = writeln!(s, "permutations = {}", self.permutations);
        let _ = writeln!(s, "rsc-trials = {}", self.rsc_trials);
        let _ = writeln!(s, "rsc-threshold = {}", self.rsc_threshold);
        let _ = writeln!(s, "pca-components = {}", self.pca_components);
        let _ = writeln!(s, "features = {}", self.features);
        if let Some(n) = self.max_tasks {
            let _ = writeln!(s, "max-tasks = {n}");
        }
        s
    }

    pub fn results_dir(&self) -> PathBuf {
        self.results_dir.clone().unwrap_or_else(|| self.out_dir.join("results"))
    }

    pub fn cache_dir(&self) -> PathBuf {
        self.cache_dir.clone().unwrap_or_else(|| self.out_dir.join("cache"))
    }

    /// The algorithm roster in registration order.
    pub fn roster(&self) -> Result<Vec<Algorithm>> {
        let roster: Vec<Algorithm> = if self.algorithms.is_empty() {
            NativeAlgorithm::ALL
                .iter()
                .map(|&a| Algorithm::Native(a))
                .chain(self.external_scorers.iter().cloned().map(Algorithm::External))
                .collect()
        } else {
            let mut seen = HashSet::new();
            let mut out = Vec::new();
            for name in &self.algorithms {
                let alg = match NativeAlgorithm::from_id(name) {
                    Some(a) => Algorithm::Native(a),
                    None => Algorithm::External(
                        self.external_scorers
                            .iter()
                            .find(|e| &e.name == name)
                            .cloned()
                            .ok_or_else(|| {
                                Error::Config(format!(
                                    "algorithm `{name}` is neither native nor a declared external scorer"
                                ))
                            })?,
                    ),
                };
                if !seen.insert(alg.name().to_string()) {
                    return Err(Error::Config(format!("algorithm `{name}` listed twice")));
                }
                out.push(alg);
            }
            out
        };
        if roster.is_empty() {
            return Err(Error::Config("the algorithm roster is empty".to_string()));
        }
        Ok(roster)
    }

    pub fn validate(&self) -> Result<()> {
        self.eval.validate()?;
        self.roster()?;
        if !METRIC_NAMES.contains(&self.rank_metric.as_str()) {
            return Err(Error::Config(format!("unknown metric `{}`", self.rank_metric)));
        }
        if self.permutations < 1 || self.rsc_trials < 1 {
            return Err(Error::Config("permutations and rsc-trials must be positive".to_string()));
        }
        if !(-1.0..=1.0).contains(&self.rsc_threshold) {
            return Err(Error::Config("rsc-threshold must lie in [-1, 1]".to_string()));
        }
        if self.pca_components < 1 {
            return Err(Error::Config("pca-components must be positive".to_string()));
        }
        Ok(())
    }

    /// Split seeds of the configured repeats.
    pub fn seeds(&self) -> Vec<u64> {
        (0..self.eval.repeats).map(|r| repeat_seed(self.eval.seed_base, r)).collect()
    }
}

// ---------------------------------------------------------------------------
// Corpus loading and features

/// A manifest with every network parsed.
pub struct LoadedCorpus {
    pub manifest: CorpusManifest,
    pub graphs: Vec<Graph>,
}

pub fn load_corpus(manifest_path: &Path) -> Result<LoadedCorpus> {
    let manifest = load_manifest(manifest_path)?;
    let graphs = par::map_slice(&manifest.entries, |e| {
        load_network(e)
            .map(|(g, report)| {
                if report.duplicates + report.self_loops > 0 {
                    log::info!(
                        "{}: dropped {} duplicate edges and {} self-loops",
                        e.network_id,
                        report.duplicates,
                        report.self_loops
                    );
                }
                g
            })
            .map_err(|err| Error::Manifest(format!("network `{}`: {err}", e.network_id)))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(LoadedCorpus { manifest, graphs })
}

/// Topology features of every network's largest component, cached by
/// content hash.
pub fn compute_features(
    corpus: &LoadedCorpus,
    cache: Option<&ArtifactCache>,
    seed: u64,
) -> Vec<Result<TopologyFeatureSet>> {
    let name = format!("features-{seed}.json");
    par::map_range(corpus.graphs.len(), |i| {
        let g = &corpus.graphs[i];
        if let Some(hit) = cache.and_then(|c| c.load_json::<TopologyFeatureSet>(g, &name)) {
            return Ok(hit);
        }
        let f = topology_features(&g.largest_connected_component(), seed)?;
        if let Some(c) = cache {
            c.store_json(g, &name, &f)?;
        }
        Ok(f)
    })
}

pub const FEATURES_HEADER: [&str; 9] = [
    "network_id",
    "domain",
    "diameter",
    "entropy",
    "clustering",
    "modularity",
    "avg_distance",
    "density",
    "estimated_flags",
];

pub fn write_features_csv(path: &Path, corpus: &LoadedCorpus, features: &[Result<TopologyFeatureSet>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(FEATURES_HEADER)?;
    for (e, f) in corpus.manifest.entries.iter().zip(features) {
        match f {
            Ok(f) => w.write_record([
                e.network_id.clone(),
                e.domain.clone(),
                f.diameter.to_string(),
                f.degree_entropy.to_string(),
                f.clustering.to_string(),
                f.modularity.to_string(),
                f.avg_distance.to_string(),
                f.density.to_string(),
                f.flags_field(),
            ])?,
            Err(err) => log::warn!("{}: features failed: {err}", e.network_id),
        }
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Evaluation

#[derive(Debug, Clone, PartialEq)]
pub struct TaskFailure {
    pub network: String,
    pub algorithm: String,
    pub seed: u64,
    pub error: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EvalSummary {
    pub total: usize,
    /// Tasks whose records were already in the store.
    pub skipped: usize,
    pub executed: usize,
    /// Pending tasks left out because of `max_tasks`.
    pub deferred: usize,
    pub failures: Vec<TaskFailure>,
}

#[derive(Debug, Clone, Copy)]
struct Task {
    network: usize,
    algorithm: usize,
    seed: u64,
}

/// Runs every (network, algorithm, seed) task not yet in the store.
///
/// One task draws the split for its seed, selects hyperparameters on the
/// validation edges, retrains on training plus validation edges, scores the
/// probe edges against the test negatives and appends the four metric
/// records. Failures are logged and reported, never fatal.
pub fn run_evaluation(
    cfg: &RunConfig,
    corpus: &LoadedCorpus,
    store: &ResultStore,
    cache: &ArtifactCache,
) -> Result<EvalSummary> {
    cfg.validate()?;
    let roster = cfg.roster()?;
    let mut tasks = Vec::new();
    for network in 0..corpus.graphs.len() {
        for algorithm in 0..roster.len() {
            for seed in cfg.seeds() {
                tasks.push(Task { network, algorithm, seed });
            }
        }
    }
    let total = tasks.len();
    let done = |t: &Task| {
        let net = &corpus.manifest.entries[t.network].network_id;
        let alg = roster[t.algorithm].name();
        METRIC_NAMES.iter().all(|m| store.contains(net, alg, t.seed, m))
    };
    let mut pending: Vec<Task> = tasks.into_iter().filter(|t| !done(t)).collect();
    let skipped = total - pending.len();
    let mut deferred = 0;
    if let Some(limit) = cfg.max_tasks {
        if pending.len() > limit {
            deferred = pending.len() - limit;
            pending.truncate(limit);
        }
    }
    log::info!(
        "{total} tasks: {skipped} already stored, {} to run, {deferred} deferred",
        pending.len()
    );
    let split_lock = Mutex::new(());
    let outcomes = par::with_workers(cfg.workers, || {
        par::map_slice(&pending, |t| {
            let net = &corpus.manifest.entries[t.network].network_id;
            let alg = &roster[t.algorithm];
            let result = run_task(cfg, corpus, cache, &split_lock, alg, t)
                .and_then(|records| store.store_batch(records).map(|_| ()));
            result.err().map(|e| {
                log::warn!("{net} / {} / seed {}: {e}", alg.name(), t.seed);
                TaskFailure {
                    network: net.clone(),
                    algorithm: alg.name().to_string(),
                    seed: t.seed,
                    error: e.to_string(),
                }
            })
        })
    });
    let failures: Vec<TaskFailure> = outcomes.into_iter().flatten().collect();
    Ok(EvalSummary {
        total,
        skipped,
        executed: pending.len(),
        deferred,
        failures,
    })
}

fn run_task(
    cfg: &RunConfig,
    corpus: &LoadedCorpus,
    cache: &ArtifactCache,
    split_lock: &Mutex<()>,
    alg: &Algorithm,
    t: &Task,
) -> Result<Vec<ResultRecord>> {
    let g = &corpus.graphs[t.network];
    let net = &corpus.manifest.entries[t.network].network_id;
    let split = make_split(g, t.seed)?;
    let test_pairs = split.test_pairs();
    let task_seed = seed::derive(t.seed, &[seed::hash_str(alg.name())]);
    let scores = match alg {
        Algorithm::Native(a) => {
            let grid = a.grid(cfg.grid);
            let selection = traverse_hyperparameters(a, &grid, g, &split, cfg.eval.auc, task_seed)?;
            let train = split.final_train_graph(g)?;
            a.score(&train, &selection.config, &test_pairs, task_seed)?.scores
        }
        Algorithm::External(ext) => {
            let dir = cache.split_dir(net, t.seed);
            {
                let _guard = split_lock.lock().expect("split lock");
                if !dir.join("negatives.txt").exists() {
                    split.write_to_dir(g, &dir)?;
                }
            }
            let path = ext.resolve(net, t.seed);
            ingest_external_scores(&path, g, &test_pairs, &ext.name)?.scores
        }
    };
    let n_pos = split.probe.len();
    let ls = LabeledScores::new(scores[..n_pos].to_vec(), scores[n_pos..].to_vec())?;
    let report = MetricReport::compute_with(&ls, cfg.eval.auc.mode(&ls, task_seed))?;
    Ok(report
        .named()
        .iter()
        .map(|&(metric, value)| ResultRecord {
            network: net.clone(),
            algorithm: alg.name().to_string(),
            seed: t.seed,
            metric: metric.to_string(),
            value,
        })
        .collect())
}

// ---------------------------------------------------------------------------
// Report

/// A (network, algorithm) cell lacking some of its seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct Gap {
    pub network: String,
    pub domain: String,
    pub algorithm: String,
    pub missing_seeds: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DomainSummary {
    pub domain: String,
    pub networks: usize,
    /// Networks with every algorithm fully evaluated.
    pub complete: usize,
    pub winner: Option<String>,
    pub saturation_size: Option<usize>,
    pub intra_consistency: Option<f64>,
}

/// Everything [`emit_report`] computed, plus the files it wrote.
#[derive(Debug, Clone)]
pub struct ReportBundle {
    pub files: Vec<PathBuf>,
    pub gaps: Vec<Gap>,
    pub domains: Vec<DomainSummary>,
    pub rank_matrices: Vec<RankMatrix>,
    pub winners: Vec<WinnerScoreTable>,
    pub embedding: Option<PcaEmbedding>,
    pub permutation: Option<PermutationResult>,
    pub rsc: Vec<RscCurve>,
}

impl ReportBundle {
    pub fn is_complete(&self) -> bool {
        self.gaps.is_empty()
    }
}

/// Mean of every metric per (network, algorithm) over the configured seeds,
/// with the cells missing seeds reported as gaps.
/// Mean metric values keyed by (network index, algorithm index), in
/// `MetricReport::named` order.
pub type MeanTable = BTreeMap<(usize, usize), [f64; 4]>;

pub fn aggregate(
    store: &ResultStore,
    manifest: &CorpusManifest,
    algorithms: &[String],
    seeds: &[u64],
) -> (MeanTable, Vec<Gap>) {
    let mut means = BTreeMap::new();
    let mut gaps = Vec::new();
    for (ni, e) in manifest.entries.iter().enumerate() {
        for (ai, alg) in algorithms.iter().enumerate() {
            let mut sums = [0.0; 4];
            let mut missing = Vec::new();
            for &s in seeds {
                let vals: Vec<Option<f64>> = METRIC_NAMES
                    .iter()
                    .map(|m| store.get(&e.network_id, alg, s, m))
                    .collect();
                if vals.iter().any(Option::is_none) {
                    missing.push(s);
                    continue;
                }
                for (acc, v) in sums.iter_mut().zip(vals) {
                    *acc += v.unwrap_or_default();
                }
            }
            if missing.is_empty() {
                means.insert((ni, ai), sums.map(|v| v / seeds.len() as f64));
            } else {
                gaps.push(Gap {
                    network: e.network_id.clone(),
                    domain: e.domain.clone(),
                    algorithm: alg.clone(),
                    missing_seeds: missing,
                });
            }
        }
    }
    (means, gaps)
}

/// Rank matrix of every domain, over the networks without gaps, plus each
/// domain's full size. Domains with no complete network are left out.
fn rank_matrices(
    manifest: &CorpusManifest,
    algorithms: &[String],
    means: &MeanTable,
    gaps: &[Gap],
    metric_idx: usize,
) -> Result<(Vec<RankMatrix>, Vec<(String, usize)>)> {
    let incomplete: HashSet<&str> = gaps.iter().map(|g| g.network.as_str()).collect();
    let mut table = HashMap::new();
    for (&(ni, ai), vals) in means {
        table.insert(
            (manifest.entries[ni].network_id.clone(), algorithms[ai].clone()),
            vals[metric_idx],
        );
    }
    let mut matrices = Vec::new();
    let mut sizes = Vec::new();
    for domain in manifest.domains() {
        let nets: Vec<String> = manifest
            .networks_in(&domain)
            .iter()
            .map(|e| e.network_id.clone())
            .collect();
        sizes.push((domain.clone(), nets.len()));
        let complete: Vec<String> = nets.into_iter().filter(|n| !incomplete.contains(n.as_str())).collect();
        if complete.is_empty() {
            continue;
        }
        matrices.push(build_rank_matrix(&domain, &complete, algorithms, &table)?);
    }
    Ok((matrices, sizes))
}

/// Rank matrices of the stored results under `cfg`'s roster, seeds and
/// ranking metric, with the gaps that kept networks out.
pub fn domain_rank_matrices(
    store: &ResultStore,
    manifest: &CorpusManifest,
    cfg: &RunConfig,
) -> Result<(Vec<RankMatrix>, Vec<Gap>)> {
    cfg.validate()?;
    let algorithms: Vec<String> = cfg.roster()?.iter().map(|a| a.name().to_string()).collect();
    let (means, gaps) = aggregate(store, manifest, &algorithms, &cfg.seeds());
    let metric_idx = METRIC_NAMES
        .iter()
        .position(|m| *m == cfg.rank_metric)
        .expect("validated metric");
    let (matrices, _) = rank_matrices(manifest, &algorithms, &means, &gaps, metric_idx)?;
    Ok((matrices, gaps))
}

/// Seed of the stability curve of `domain`.
pub fn rsc_seed(seed_base: u64, domain: &str) -> u64 {
    seed::derive(seed_base, &[seed::hash_str("rsc"), seed::hash_str(domain)])
}

/// Writes `rsc_<domain>.csv` with one `L,mean_tau` row per sample size.
pub fn write_rsc_csv(out: &Path, curve: &RscCurve) -> Result<PathBuf> {
    let path = out.join(format!("rsc_{}.csv", file_safe(&curve.domain)));
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["L", "mean_tau"])?;
    for (l, t) in curve.points() {
        w.write_record([l.to_string(), t.to_string()])?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn file_safe(domain: &str) -> String {
    domain
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

/// Writes the report bundle into `out`:
///
/// * `mean_metrics.csv`, `ranks.csv`: per-network means and ranks
/// * `consistency.csv`, `winner_scores.csv`
/// * `pca_coords.csv`, `pca_variance.csv`, `permutation.csv`
/// * `rsc_<domain>.csv`
/// * `gaps.csv` and `summary.txt`
///
/// Networks lacking any (algorithm, seed) result are left out of the
/// statistics and listed in `gaps.csv`.
pub fn emit_report(store: &ResultStore, manifest: &CorpusManifest, cfg: &RunConfig, out: &Path) -> Result<ReportBundle> {
    cfg.validate()?;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let algorithms: Vec<String> = cfg.roster()?.iter().map(|a| a.name().to_string()).collect();
    let seeds = cfg.seeds();
    let (means, gaps) = aggregate(store, manifest, &algorithms, &seeds);
    let metric_idx = METRIC_NAMES
        .iter()
        .position(|m| *m == cfg.rank_metric)
        .expect("validated metric");
    let mut files = Vec::new();

    // per-network means
    let path = out.join("mean_metrics.csv");
    let mut w = csv::Writer::from_path(&path)?;
    let mut header = vec!["network_id", "domain", "algorithm"];
    header.extend(METRIC_NAMES);
    w.write_record(&header)?;
    for (&(ni, ai), vals) in &means {
        let e = &manifest.entries[ni];
        let mut rec = vec![e.network_id.clone(), e.domain.clone(), algorithms[ai].clone()];
        rec.extend(vals.iter().map(f64::to_string));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    files.push(path);

    let (rank_matrices, domain_sizes) = rank_matrices(manifest, &algorithms, &means, &gaps, metric_idx)?;

    let path = out.join("ranks.csv");
    let mut w = csv::Writer::from_path(&path)?;
    let mut header = vec!["network_id".to_string(), "domain".to_string()];
    header.extend(algorithms.iter().cloned());
    w.write_record(&header)?;
    for p in &rank_matrices {
        for (net, row) in p.networks().iter().zip(p.rows()) {
            let mut rec = vec![net.clone(), p.domain().to_string()];
            rec.extend(row.iter().map(u32::to_string));
            w.write_record(&rec)?;
        }
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    files.push(path);

    // consistency
    let consistency = consistency_matrix(&rank_matrices)?;
    let path = out.join("consistency.csv");
    let mut w = csv::Writer::from_path(&path)?;
    let mut header = vec!["domain".to_string()];
    header.extend(consistency.domains.iter().cloned());
    w.write_record(&header)?;
    for (d, row) in consistency.domains.iter().zip(&consistency.values) {
        let mut rec = vec![d.clone()];
        rec.extend(row.iter().map(|v| fmt_opt(*v)));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    files.push(path);

    // winner scores
    let winners: Vec<WinnerScoreTable> = rank_matrices.iter().map(winner_scores).collect();
    let path = out.join("winner_scores.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["domain", "algorithm", "raw", "normalized"])?;
    for t in &winners {
        for (k, alg) in t.algorithms.iter().enumerate() {
            w.write_record([
                t.domain.clone(),
                alg.clone(),
                t.raw[k].to_string(),
                t.normalized[k].to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    files.push(path);

    // fingerprints and the permutation test
    let mut networks = Vec::new();
    let mut labels = Vec::new();
    let mut rows = Vec::new();
    for p in &rank_matrices {
        for (i, net) in p.networks().iter().enumerate() {
            networks.push(net.clone());
            labels.push(p.domain().to_string());
            rows.push(p.row_f64(i));
        }
    }
    let embedding = match pca_embed(&networks, &labels, &rows, cfg.pca_components) {
        Ok(e) => Some(e),
        Err(e) => {
            log::warn!("skipping PCA: {e}");
            None
        }
    };
    let path = out.join("pca_coords.csv");
    let mut w = csv::Writer::from_path(&path)?;
    let k = embedding
        .as_ref()
        .and_then(|e| e.coords.first().map(Vec::len))
        .unwrap_or(cfg.pca_components);
    let mut header = vec!["network_id".to_string(), "domain".to_string()];
    header.extend((1..=k).map(|c| format!("pc{c}")));
    w.write_record(&header)?;
    if let Some(e) = &embedding {
        for ((net, lab), c) in e.networks.iter().zip(&e.labels).zip(&e.coords) {
            let mut rec = vec![net.clone(), lab.clone()];
            rec.extend(c.iter().map(f64::to_string));
            w.write_record(&rec)?;
        }
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    files.push(path);

    let path = out.join("pca_variance.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["component", "explained_variance_ratio"])?;
    if let Some(e) = &embedding {
        for (c, r) in e.explained_variance_ratio.iter().enumerate() {
            w.write_record([(c + 1).to_string(), r.to_string()])?;
        }
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    files.push(path);

    let permutation = match &embedding {
        Some(e) if e.domains().len() >= 2 => {
            let s = seed::derive(cfg.eval.seed_base, &[seed::hash_str("permutation")]);
            Some(permutation_test(e, cfg.permutations, s)?)
        }
        _ => None,
    };
    let path = out.join("permutation.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["domain", "size", "observed", "null_mean", "p_value"])?;
    if let Some(r) = &permutation {
        for d in &r.domains {
            w.write_record([
                d.domain.clone(),
                d.size.to_string(),
                d.observed.to_string(),
                d.null_mean.to_string(),
                d.p_value.to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    files.push(path);

    // stability curves
    let mut rsc = Vec::new();
    for p in rank_matrices.iter().filter(|p| p.len() >= 2) {
        let curve = rsc_curve(p, cfg.rsc_trials, rsc_seed(cfg.eval.seed_base, p.domain()), cfg.rsc_threshold)?;
        files.push(write_rsc_csv(out, &curve)?);
        rsc.push(curve);
    }

    // gaps
    let path = out.join("gaps.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["network_id", "domain", "algorithm", "missing_seeds"])?;
    for g in &gaps {
        let seeds: Vec<String> = g.missing_seeds.iter().map(u64::to_string).collect();
        w.write_record([g.network.clone(), g.domain.clone(), g.algorithm.clone(), seeds.join(";")])?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    files.push(path);

    // summary
    let mut domains = Vec::new();
    for (domain, size) in domain_sizes {
        let idx = rank_matrices.iter().position(|p| p.domain() == domain);
        let ci = consistency.domains.iter().position(|d| *d == domain);
        domains.push(DomainSummary {
            domain: domain.clone(),
            networks: size,
            complete: idx.map_or(0, |i| rank_matrices[i].len()),
            winner: idx.and_then(|i| winners[i].winner().map(|w| winners[i].algorithms[w].clone())),
            saturation_size: rsc.iter().find(|c| c.domain == domain).and_then(RscCurve::saturation_size),
            intra_consistency: ci.and_then(|i| consistency.values[i][i]),
        });
    }
    let path = out.join("summary.txt");
    fs::write(&path, render_summary(cfg, &algorithms, &domains, &consistency, &embedding, &permutation, &gaps))
        .map_err(|e| Error::io(&path, e))?;
    files.push(path);

    Ok(ReportBundle {
        files,
        gaps,
        domains,
        rank_matrices,
        winners,
        embedding,
        permutation,
        rsc,
    })
}

fn render_summary(
    cfg: &RunConfig,
    algorithms: &[String],
    domains: &[DomainSummary],
    consistency: &crate::stats::ConsistencyMatrix,
    embedding: &Option<PcaEmbedding>,
    permutation: &Option<PermutationResult>,
    gaps: &[Gap],
) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "algorithms: {}", algorithms.join(", "));
    let _ = writeln!(
        s,
        "ranking metric: {} (mean over {} splits, seed base {})",
        cfg.rank_metric, cfg.eval.repeats, cfg.eval.seed_base
    );
    let _ = writeln!(s);
    let _ = writeln!(
        s,
        "{:<24} {:>8} {:>8} {:>10} {:>8} {:>10}",
        "domain", "networks", "complete", "winner", "L*", "intra R"
    );
    for d in domains {
        let _ = writeln!(
            s,
            "{:<24} {:>8} {:>8} {:>10} {:>8} {:>10}",
            d.domain,
            d.networks,
            d.complete,
            d.winner.as_deref().unwrap_or("-"),
            d.saturation_size.map_or("-".to_string(), |l| l.to_string()),
            d.intra_consistency.map_or("-".to_string(), |r| format!("{r:.4}")),
        );
    }
    let (inter, intra) = consistency.summary();
    let _ = writeln!(s);
    let _ = writeln!(
        s,
        "mean inter-domain consistency: {}",
        inter.map_or("-".to_string(), |v| format!("{v:.4}"))
    );
    let _ = writeln!(
        s,
        "mean intra-domain consistency: {}",
        intra.map_or("-".to_string(), |v| format!("{v:.4}"))
    );
    if let Some(e) = embedding {
        let _ = writeln!(
            s,
            "variance retained by {} components: {:.4}",
            e.coords.first().map_or(0, Vec::len),
            e.retained_variance()
        );
    }
    if let Some(p) = permutation {
        let _ = writeln!(
            s,
            "permutation test ({} permutations): grand null mean {:.4}, global mean distance {:.4}",
            p.permutations, p.grand_null_mean, p.global_mean_distance
        );
        for d in &p.domains {
            let _ = writeln!(
                s,
                "  {:<22} observed {:.4}  null mean {:.4}  p = {:.4}",
                d.domain, d.observed, d.null_mean, d.p_value
            );
        }
    }
    let _ = writeln!(s);
    if gaps.is_empty() {
        let _ = writeln!(s, "coverage: complete");
    } else {
        let _ = writeln!(s, "coverage: {} incomplete cells", gaps.len());
        for g in gaps {
            let _ = writeln!(
                s,
                "  missing {} / {} ({} seeds)",
                g.network,
                g.algorithm,
                g.missing_seeds.len()
            );
        }
    }
    s
}

// ---------------------------------------------------------------------------
// Whole run

#[derive(Debug, Clone)]
pub struct PipelineOutcome {
    pub evaluation: EvalSummary,
    pub report: ReportBundle,
}

impl PipelineOutcome {
    pub fn is_complete(&self) -> bool {
        self.report.is_complete()
    }
}

/// ingest, features, evaluate, stats and report in one call. Already
/// stored results are reused, so rerunning an interrupted run finishes it.
pub fn run_pipeline(cfg: &RunConfig) -> Result<PipelineOutcome> {
    cfg.validate()?;
    let corpus = load_corpus(&cfg.manifest)?;
    fs::create_dir_all(&cfg.out_dir).map_err(|e| Error::io(&cfg.out_dir, e))?;
    let cache = ArtifactCache::new(&cfg.cache_dir())?;
    let store = ResultStore::open(&cfg.results_dir())?;
    let snapshot = cfg.results_dir().join("config.txt");
    fs::write(&snapshot, cfg.snapshot()).map_err(|e| Error::io(&snapshot, e))?;

    if cfg.features {
        let features = par::with_workers(cfg.workers, || compute_features(&corpus, Some(&cache), cfg.eval.seed_base));
        write_features_csv(&cfg.out_dir.join("features.csv"), &corpus, &features)?;
    }
    let evaluation = run_evaluation(cfg, &corpus, &store, &cache)?;
    store.consolidate()?;
    let report = par::with_workers(cfg.workers, || emit_report(&store, &corpus.manifest, cfg, &cfg.out_dir))?;
    Ok(PipelineOutcome { evaluation, report })
}
