//! Corpus manifests, result persistence, derived-artifact cache and the
//! synthetic corpus generator.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{canonical_pair, read_edge_list, Graph, Pair, ParseOptions, ParseReport};
use crate::seed;

// ---------------------------------------------------------------------------
// Manifest

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub network_id: String,
    pub path: PathBuf,
    pub domain: String,
}

/// Networks of the corpus with their domain labels. Paths are resolved
/// against the manifest's directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusManifest {
    pub entries: Vec<ManifestEntry>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum JsonManifest {
    List(Vec<ManifestEntry>),
    Wrapped { entries: Vec<ManifestEntry> },
}

impl CorpusManifest {
    pub fn new(entries: Vec<ManifestEntry>) -> Result<Self> {
        let mut ids = HashSet::new();
        for e in &entries {
            if e.network_id.trim().is_empty() {
                return Err(Error::Manifest("empty network id".to_string()));
            }
            if !ids.insert(e.network_id.as_str()) {
                return Err(Error::Manifest(format!("duplicate network id `{}`", e.network_id)));
            }
            if e.domain.trim().is_empty() {
                return Err(Error::Manifest(format!("network `{}` has an empty domain", e.network_id)));
            }
        }
        Ok(CorpusManifest { entries })
    }

    /// Distinct domain labels in sorted order.
    pub fn domains(&self) -> Vec<String> {
        let set: BTreeSet<&str> = self.entries.iter().map(|e| e.domain.as_str()).collect();
        set.into_iter().map(String::from).collect()
    }

    /// Networks per domain (`u_p`).
    pub fn domain_counts(&self) -> BTreeMap<String, usize> {
        let mut counts = BTreeMap::new();
        for e in &self.entries {
            *counts.entry(e.domain.clone()).or_insert(0) += 1;
        }
        counts
    }

    pub fn networks_in(&self, domain: &str) -> Vec<&ManifestEntry> {
        self.entries.iter().filter(|e| e.domain == domain).collect()
    }

    pub fn domain_of(&self, network: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|e| e.network_id == network)
            .map(|e| e.domain.as_str())
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["network_id", "path", "domain"])?;
        for e in &self.entries {
            w.write_record([e.network_id.as_str(), &e.path.to_string_lossy(), e.domain.as_str()])?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }
}

/// Loads a CSV (`network_id,path,domain`) or JSON manifest and checks that
/// every listed file exists.
pub fn load_manifest(path: &Path) -> Result<CorpusManifest> {
    let base = path.parent().unwrap_or(Path::new("")).to_path_buf();
    let is_json = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let mut entries: Vec<ManifestEntry> = if is_json {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        match serde_json::from_str::<JsonManifest>(&text)? {
            JsonManifest::List(v) => v,
            JsonManifest::Wrapped { entries } => entries,
        }
    } else {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_path(path)
            .map_err(|e| Error::Manifest(format!("{}: {e}", path.display())))?;
        let headers = rdr.headers()?.clone();
        for col in ["network_id", "path", "domain"] {
            if !headers.iter().any(|h| h == col) {
                return Err(Error::Manifest(format!("missing column `{col}`")));
            }
        }
        rdr.deserialize().collect::<std::result::Result<_, _>>()?
    };
    for e in &mut entries {
        if e.path.is_relative() {
            e.path = base.join(&e.path);
        }
    }
    let manifest = CorpusManifest::new(entries)?;
    for e in &manifest.entries {
        if !e.path.is_file() {
            return Err(Error::Manifest(format!(
                "network `{}`: file {} not found",
                e.network_id,
                e.path.display()
            )));
        }
    }
    Ok(manifest)
}

/// Loads one network of the manifest.
pub fn load_network(entry: &ManifestEntry) -> Result<(Graph, ParseReport)> {
    read_edge_list(&entry.path, &ParseOptions::default())
}

// ---------------------------------------------------------------------------
// Result store

/// One metric value of one `(network, algorithm, seed)` evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub network: String,
    pub algorithm: String,
    pub seed: u64,
    pub metric: String,
    pub value: f64,
}

impl ResultRecord {
    pub fn key(&self) -> RecordKey {
        (
            self.network.clone(),
            self.algorithm.clone(),
            self.seed,
            self.metric.clone(),
        )
    }
}

pub type RecordKey = (String, String, u64, String);

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ResultFilter {
    pub domain: Option<String>,
    pub algorithm: Option<String>,
    pub network: Option<String>,
    pub metric: Option<String>,
}

/// Query output. `unknown` is set when a filter names an id that does not
/// occur in the store.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryResult {
    pub records: Vec<ResultRecord>,
    pub unknown: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StoreOutcome {
    Appended,
    AlreadyPresent,
}

struct Appender {
    file: File,
}

/// Append-only JSON-lines log of metric records, plus a consolidated CSV.
///
/// Appends from parallel workers serialize through one mutex-guarded writer;
/// each batch is written with a single `write_all` and flushed, so a crash
/// leaves at most one torn trailing line, which is ignored on reload.
pub struct ResultStore {
    dir: PathBuf,
    records: Mutex<BTreeMap<RecordKey, f64>>,
    writer: Mutex<Appender>,
}

pub const RESULTS_LOG: &str = "results.jsonl";
pub const RESULTS_TABLE: &str = "results.csv";

impl ResultStore {
    pub fn open(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let log_path = dir.join(RESULTS_LOG);
        let mut records = BTreeMap::new();
        let mut torn = false;
        if log_path.exists() {
            let f = File::open(&log_path).map_err(|e| Error::io(&log_path, e))?;
            for line in BufReader::new(f).lines() {
                let line = line.map_err(|e| Error::io(&log_path, e))?;
                if line.trim().is_empty() {
                    continue;
                }
                match serde_json::from_str::<ResultRecord>(&line) {
                    Ok(r) => {
                        records.entry(r.key()).or_insert(r.value);
                    }
                    Err(_) => torn = true,
                }
            }
        }
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&log_path)
            .map_err(|e| Error::io(&log_path, e))?;
        if torn {
            log::warn!("{}: skipped unreadable lines", log_path.display());
            // terminate any torn line so the next append starts cleanly
            file.write_all(b"\n").map_err(|e| Error::io(&log_path, e))?;
        }
        Ok(ResultStore {
            dir: dir.to_path_buf(),
            records: Mutex::new(records),
            writer: Mutex::new(Appender { file }),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn contains(&self, network: &str, algorithm: &str, seed: u64, metric: &str) -> bool {
        let key = (network.to_string(), algorithm.to_string(), seed, metric.to_string());
        self.records.lock().expect("store lock").contains_key(&key)
    }

    pub fn get(&self, network: &str, algorithm: &str, seed: u64, metric: &str) -> Option<f64> {
        let key = (network.to_string(), algorithm.to_string(), seed, metric.to_string());
        self.records.lock().expect("store lock").get(&key).copied()
    }

    pub fn store_result(&self, record: ResultRecord) -> Result<StoreOutcome> {
        let outcome = self.store_batch(vec![record])?;
        Ok(if outcome == 0 {
            StoreOutcome::AlreadyPresent
        } else {
            StoreOutcome::Appended
        })
    }

    /// Appends the records not yet stored; returns how many were new.
    pub fn store_batch(&self, batch: Vec<ResultRecord>) -> Result<usize> {
        let mut writer = self.writer.lock().expect("writer lock");
        let mut records = self.records.lock().expect("store lock");
        let mut text = String::new();
        let mut fresh = Vec::new();
        for r in batch {
            let key = r.key();
            if let Some(old) = records.get(&key) {
                if old.to_bits() != r.value.to_bits() {
                    log::warn!(
                        "ignoring conflicting value for {key:?}: stored {old}, new {}",
                        r.value
                    );
                }
                continue;
            }
            text.push_str(&serde_json::to_string(&r)?);
            text.push('\n');
            fresh.push((key, r.value));
        }
        if fresh.is_empty() {
            return Ok(0);
        }
        let path = self.dir.join(RESULTS_LOG);
        writer
            .file
            .write_all(text.as_bytes())
            .and_then(|_| writer.file.flush())
            .map_err(|e| Error::io(&path, e))?;
        let n = fresh.len();
        records.extend(fresh);
        Ok(n)
    }

    pub fn all(&self) -> Vec<ResultRecord> {
        self.records
            .lock()
            .expect("store lock")
            .iter()
            .map(|((network, algorithm, seed, metric), &value)| ResultRecord {
                network: network.clone(),
                algorithm: algorithm.clone(),
                seed: *seed,
                metric: metric.clone(),
                value,
            })
            .collect()
    }

    /// Records matching every given filter field. Domain filtering needs the
    /// manifest to map networks to domains.
    pub fn query_results(&self, filter: &ResultFilter, manifest: Option<&CorpusManifest>) -> QueryResult {
        let all = self.all();
        let mut unknown = false;
        if let Some(n) = &filter.network {
            unknown |= !all.iter().any(|r| &r.network == n);
        }
        if let Some(a) = &filter.algorithm {
            unknown |= !all.iter().any(|r| &r.algorithm == a);
        }
        if let Some(d) = &filter.domain {
            unknown |= manifest.is_none_or(|m| !m.entries.iter().any(|e| &e.domain == d));
        }
        let records = all
            .into_iter()
            .filter(|r| filter.network.as_ref().is_none_or(|n| &r.network == n))
            .filter(|r| filter.algorithm.as_ref().is_none_or(|a| &r.algorithm == a))
            .filter(|r| filter.metric.as_ref().is_none_or(|m| &r.metric == m))
            .filter(|r| {
                filter.domain.as_ref().is_none_or(|d| {
                    manifest.and_then(|m| m.domain_of(&r.network)) == Some(d.as_str())
                })
            })
            .collect();
        QueryResult { records, unknown }
    }

    /// Writes `results.csv` sorted by `(network, algorithm, seed, metric)`.
    pub fn consolidate(&self) -> Result<PathBuf> {
        let path = self.dir.join(RESULTS_TABLE);
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(["network", "algorithm", "seed", "metric", "value"])?;
        for r in self.all() {
            w.write_record([
                r.network.as_str(),
                r.algorithm.as_str(),
                &r.seed.to_string(),
                r.metric.as_str(),
                &r.value.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }
}

// ---------------------------------------------------------------------------
// Derived-artifact cache

/// Directory of artifacts keyed by the content hash of a canonical edge list.
#[derive(Debug, Clone)]
pub struct ArtifactCache {
    root: PathBuf,
}

impl ArtifactCache {
    pub fn new(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
        Ok(ArtifactCache {
            root: root.to_path_buf(),
        })
    }

    pub fn dir_for(&self, g: &Graph) -> PathBuf {
        self.root.join(g.content_hash())
    }

    pub fn load_json<T: for<'de> Deserialize<'de>>(&self, g: &Graph, name: &str) -> Option<T> {
        let path = self.dir_for(g).join(name);
        let text = fs::read_to_string(path).ok()?;
        serde_json::from_str(&text).ok()
    }

    pub fn store_json<T: Serialize>(&self, g: &Graph, name: &str, value: &T) -> Result<()> {
        let dir = self.dir_for(g);
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let path = dir.join(name);
        fs::write(&path, serde_json::to_vec_pretty(value)?).map_err(|e| Error::io(&path, e))
    }

    /// Canonical edge list of the graph's largest component, written once.
    pub fn store_lcc(&self, g: &Graph) -> Result<PathBuf> {
        let dir = self.dir_for(g);
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let path = dir.join("lcc.txt");
        if !path.exists() {
            let lcc = g.largest_connected_component();
            fs::write(&path, lcc.canonical_string()).map_err(|e| Error::io(&path, e))?;
        }
        Ok(path)
    }

    pub fn split_dir(&self, network: &str, seed: u64) -> PathBuf {
        self.root.join("splits").join(network).join(seed.to_string())
    }
}

// ---------------------------------------------------------------------------
// Synthetic corpora

/// Random graph families available to the synthetic corpus generator.
#[derive(Debug, Clone, PartialEq)]
pub enum GraphFamily {
    /// Erdos-Renyi G(n, p).
    ErdosRenyi { n: usize, p: f64 },
    /// Preferential attachment; each new node brings `m` edges.
    BarabasiAlbert { n: usize, m: usize },
    /// Ring lattice with `k` neighbours per node, edges rewired with prob. `p`.
    WattsStrogatz { n: usize, k: usize, p: f64 },
    /// Preferential attachment where each further edge closes a triangle
    /// with probability `triad_p`.
    HolmeKim { n: usize, m: usize, triad_p: f64 },
    /// Random bipartite graph between sides of size `left` and `right`.
    Bipartite { left: usize, right: usize, p: f64 },
}

impl GraphFamily {
    pub fn validate(&self) -> Result<()> {
        let prob = |p: f64, what: &str| {
            if p > 0.0 && p <= 1.0 {
                Ok(())
            } else {
                Err(Error::arg(format!("{what} probability must lie in (0, 1], got {p}")))
            }
        };
        match *self {
            GraphFamily::ErdosRenyi { n, p } => {
                if n < 2 {
                    return Err(Error::arg("ER needs n >= 2"));
                }
                prob(p, "ER edge")
            }
            GraphFamily::BarabasiAlbert { n, m } => {
                if m < 1 || m >= n {
                    return Err(Error::arg(format!("BA needs 1 <= m < n, got m={m}, n={n}")));
                }
                Ok(())
            }
            GraphFamily::WattsStrogatz { n, k, p } => {
                if k < 2 || k % 2 != 0 || k >= n {
                    return Err(Error::arg(format!("WS needs an even k with 2 <= k < n, got k={k}")));
                }
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::arg(format!("WS rewiring probability must lie in [0, 1], got {p}")));
                }
                Ok(())
            }
            GraphFamily::HolmeKim { n, m, triad_p } => {
                if m < 1 || m >= n {
                    return Err(Error::arg(format!("HK needs 1 <= m < n, got m={m}, n={n}")));
                }
                if !(0.0..=1.0).contains(&triad_p) {
                    return Err(Error::arg("HK triad probability must lie in [0, 1]"));
                }
                Ok(())
            }
            GraphFamily::Bipartite { left, right, p } => {
                if left == 0 || right == 0 {
                    return Err(Error::arg("bipartite sides must be non-empty"));
                }
                prob(p, "bipartite edge")
            }
        }
    }

    pub fn generate(&self, seed: u64) -> Result<Graph> {
        self.validate()?;
        let mut rng = seed::rng(seed, &[0x6E4]);
        let (n, edges) = match *self {
            GraphFamily::ErdosRenyi { n, p } => {
                let mut e = Vec::new();
                for i in 0..n {
                    for j in i + 1..n {
                        if p >= 1.0 || rng.random::<f64>() < p {
                            e.push((i, j));
                        }
                    }
                }
                (n, e)
            }
            GraphFamily::BarabasiAlbert { n, m } => (n, preferential(n, m, 0.0, &mut rng)),
            GraphFamily::HolmeKim { n, m, triad_p } => (n, preferential(n, m, triad_p, &mut rng)),
            GraphFamily::WattsStrogatz { n, k, p } => (n, watts_strogatz(n, k, p, &mut rng)),
            GraphFamily::Bipartite { left, right, p } => {
                let mut e = Vec::new();
                for i in 0..left {
                    for j in 0..right {
                        if p >= 1.0 || rng.random::<f64>() < p {
                            e.push((i, left + j));
                        }
                    }
                }
                (left + right, e)
            }
        };
        Graph::from_edges(n, edges)
    }

    /// Parses `er:n=100,p=0.05`, `ba:n=100,m=2`, `ws:n=100,k=4,p=0.1`,
    /// `hk:n=100,m=3,pt=0.8` or `bipartite:left=50,right=50,p=0.1`.
    pub fn parse(spec: &str) -> Result<Self> {
        let (name, params) = spec.split_once(':').unwrap_or((spec, ""));
        let mut kv = BTreeMap::new();
        for part in params.split(',').filter(|s| !s.trim().is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::arg(format!("bad family parameter `{part}`")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::arg(format!("bad value in `{part}`")))?;
            kv.insert(k.trim().to_string(), v);
        }
        let get = |k: &str| {
            kv.get(k)
                .copied()
                .ok_or_else(|| Error::arg(format!("family `{name}` needs parameter `{k}`")))
        };
        let int = |k: &str| get(k).map(|v| v as usize);
        let fam = match name.trim().to_ascii_lowercase().as_str() {
            "er" => GraphFamily::ErdosRenyi { n: int("n")?, p: get("p")? },
            "ba" => GraphFamily::BarabasiAlbert { n: int("n")?, m: int("m")? },
            "ws" => GraphFamily::WattsStrogatz { n: int("n")?, k: int("k")?, p: get("p")? },
            "hk" => GraphFamily::HolmeKim { n: int("n")?, m: int("m")?, triad_p: get("pt")? },
            "bipartite" => GraphFamily::Bipartite {
                left: int("left")?,
                right: int("right")?,
                p: get("p")?,
            },
            other => return Err(Error::arg(format!("unknown graph family `{other}`"))),
        };
        fam.validate()?;
        Ok(fam)
    }
}

/// Preferential attachment seeded with a star on `m + 1` nodes; each new
/// node adds `m` edges. After the first (preferential) target, every further
/// edge closes a triangle with probability `triad_p` when possible.
fn preferential(n: usize, m: usize, triad_p: f64, rng: &mut seed::TaskRng) -> Vec<Pair> {
    let mut edges: Vec<Pair> = (1..=m).map(|v| (0, v)).collect();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    // each endpoint appears once per incident edge: degree-proportional urn
    let mut urn: Vec<usize> = Vec::new();
    for &(a, b) in &edges {
        adj[a].push(b);
        adj[b].push(a);
        urn.push(a);
        urn.push(b);
    }
    for v in m + 1..n {
        let mut targets: Vec<usize> = Vec::with_capacity(m);
        let mut last: Option<usize> = None;
        while targets.len() < m {
            let candidate = match last {
                Some(t) if triad_p > 0.0 && rng.random::<f64>() < triad_p => {
                    let options: Vec<usize> =
                        adj[t].iter().copied().filter(|u| *u != v && !targets.contains(u)).collect();
                    match options.choose(rng) {
                        Some(&u) => u,
                        None => urn[rng.random_range(0..urn.len())],
                    }
                }
                _ => urn[rng.random_range(0..urn.len())],
            };
            if candidate == v || targets.contains(&candidate) {
                continue;
            }
            targets.push(candidate);
            last = Some(candidate);
        }
        for t in targets {
            edges.push((t, v));
            adj[t].push(v);
            adj[v].push(t);
            urn.push(t);
            urn.push(v);
        }
    }
    edges
}

fn watts_strogatz(n: usize, k: usize, p: f64, rng: &mut seed::TaskRng) -> Vec<Pair> {
    let mut set: BTreeSet<Pair> = BTreeSet::new();
    for i in 0..n {
        for s in 1..=k / 2 {
            set.insert(canonical_pair(i, (i + s) % n));
        }
    }
    for s in 1..=k / 2 {
        for i in 0..n {
            let old = canonical_pair(i, (i + s) % n);
            if !set.contains(&old) || rng.random::<f64>() >= p {
                continue;
            }
            // rewire the far endpoint; skip if the node is already saturated
            let mut tries = 0;
            while tries < 10 * n {
                tries += 1;
                let w = rng.random_range(0..n);
                let new = canonical_pair(i, w);
                if w == i || set.contains(&new) {
                    continue;
                }
                set.remove(&old);
                set.insert(new);
                break;
            }
        }
    }
    set.into_iter().collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDomain {
    pub name: String,
    pub family: GraphFamily,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub domains: Vec<SyntheticDomain>,
    pub seed: u64,
}

/// Writes one edge-list file per generated network under `dir` plus a
/// `manifest.csv`, and returns the manifest. Output is byte-identical for a
/// fixed seed.
pub fn generate_synthetic_corpus(spec: &SyntheticSpec, dir: &Path) -> Result<CorpusManifest> {
    if spec.domains.is_empty() {
        return Err(Error::arg("synthetic corpus needs at least one domain"));
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut entries = Vec::new();
    for (d, dom) in spec.domains.iter().enumerate() {
        dom.family.validate()?;
        if dom.name.trim().is_empty() || dom.name.contains(['/', '\\', ',']) {
            return Err(Error::arg(format!("bad domain name `{}`", dom.name)));
        }
        for i in 0..dom.count {
            let g = dom
                .family
                .generate(seed::derive(spec.seed, &[d as u64, i as u64]))?;
            if g.edge_count() == 0 {
                return Err(Error::arg(format!(
                    "{} network {i} came out empty; raise the edge probability",
                    dom.name
                )));
            }
            let id = format!("{}_{i:03}", dom.name);
            let file = format!("{id}.txt");
            let path = dir.join(&file);
            fs::write(&path, g.canonical_string()).map_err(|e| Error::io(&path, e))?;
            entries.push(ManifestEntry {
                network_id: id,
                path: PathBuf::from(file),
                domain: dom.name.clone(),
            });
        }
    }
    let manifest = CorpusManifest::new(entries)?;
    manifest.write_csv(&dir.join("manifest.csv"))?;
    Ok(manifest)
}
