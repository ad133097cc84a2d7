//! Train / validation / probe splits, negative sampling and validation-based
//! hyperparameter selection.

use std::collections::HashSet;
use std::fmt::Debug;
use std::io::Write;
use std::path::Path;

use rand::seq::{index, SliceRandom};
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{canonical_pair, Graph, Pair};
use crate::metrics::{auc, AucMode, LabeledScores};
use crate::predictors::{Hyperparams, NativeAlgorithm};
use crate::seed::{self, TaskRng};

/// Sizes `(train, validation, probe)` for `m` edges: the probe set gets
/// `round(0.20 m)`, validation `round(0.16 m)`, training the rest.
pub fn split_sizes(m: usize) -> (usize, usize, usize) {
    // integer round-half-up of 0.20 m and 0.16 m
    let probe = (20 * m + 50) / 100;
    let validation = (16 * m + 50) / 100;
    (m - probe - validation, validation, probe)
}

/// One seeded partition of the observed edges plus sampled non-edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitSample {
    pub seed: u64,
    pub train: Vec<Pair>,
    pub validation: Vec<Pair>,
    pub probe: Vec<Pair>,
    /// `|probe|` uniform non-edges paired with the probe set.
    pub negatives: Vec<Pair>,
    /// Non-edges for validation scoring, disjoint from `negatives`.
    pub validation_negatives: Vec<Pair>,
}

impl SplitSample {
    pub fn train_graph(&self, g: &Graph) -> Result<Graph> {
        g.with_edge_set(self.train.iter().copied())
    }

    /// Training plus validation edges: what the final model is fitted on.
    pub fn final_train_graph(&self, g: &Graph) -> Result<Graph> {
        g.with_edge_set(self.train.iter().chain(&self.validation).copied())
    }

    /// Probe positives followed by the test negatives.
    pub fn test_pairs(&self) -> Vec<Pair> {
        self.probe.iter().chain(&self.negatives).copied().collect()
    }

    pub fn validation_pairs(&self) -> Vec<Pair> {
        self.validation
            .iter()
            .chain(&self.validation_negatives)
            .copied()
            .collect()
    }

    /// Writes `train.txt`, `validation.txt`, `probe.txt`, `negatives.txt`
    /// and `validation_negatives.txt` with original node labels.
    pub fn write_to_dir(&self, g: &Graph, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let parts: [(&str, &[Pair]); 5] = [
            ("train.txt", &self.train),
            ("validation.txt", &self.validation),
            ("probe.txt", &self.probe),
            ("negatives.txt", &self.negatives),
            ("validation_negatives.txt", &self.validation_negatives),
        ];
        for (name, pairs) in parts {
            let path = dir.join(name);
            let mut sorted = pairs.to_vec();
            sorted.sort_unstable();
            let mut text = String::new();
            for (i, j) in sorted {
                text.push_str(&g.label(i));
                text.push(' ');
                text.push_str(&g.label(j));
                text.push('\n');
            }
            let mut f = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
            f.write_all(text.as_bytes()).map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }
}

/// Enumeration is used below this universe size or when non-edges are scarce.
const ENUMERATE_LIMIT: u64 = 2_000_000;

/// Draws `count` distinct non-edges uniformly at random.
pub fn sample_non_edges(g: &Graph, count: usize, rng: &mut TaskRng) -> Result<Vec<Pair>> {
    let space = g.candidate_space();
    let available = space.non_edge_count();
    if (count as u64) > available {
        return Err(Error::InsufficientNonEdges {
            needed: count,
            available,
        });
    }
    let n = g.node_count();
    if space.universe_size() <= ENUMERATE_LIMIT || 4 * count as u64 >= available {
        let mut all = Vec::with_capacity(available as usize);
        for i in 0..n {
            let nb = g.neighbors(i);
            let mut k = nb.partition_point(|&x| x <= i);
            for j in i + 1..n {
                if k < nb.len() && nb[k] == j {
                    k += 1;
                    continue;
                }
                all.push((i, j));
            }
        }
        return Ok(index::sample(rng, all.len(), count)
            .into_iter()
            .map(|k| all[k])
            .collect());
    }
    let mut seen = HashSet::with_capacity(count * 2);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        if a == b {
            continue;
        }
        let p = canonical_pair(a, b);
        if g.has_edge(p.0, p.1) || !seen.insert(p) {
            continue;
        }
        out.push(p);
    }
    Ok(out)
}

/// Uniform random split at 0.64 / 0.16 / 0.20 with uniform negatives.
///
/// Requires at least five edges so every part is non-empty. Validation
/// negatives number `|validation|` when enough non-edges remain after the
/// test negatives, otherwise all that remain.
pub fn make_split(g: &Graph, seed: u64) -> Result<SplitSample> {
    let m = g.edge_count();
    if m < 5 {
        return Err(Error::arg(format!("splitting needs at least 5 edges, graph has {m}")));
    }
    let (_, n_val, n_probe) = split_sizes(m);
    let available = g.candidate_space().non_edge_count();
    if available < n_probe as u64 {
        return Err(Error::InsufficientNonEdges {
            needed: n_probe,
            available,
        });
    }
    let n_val_neg = n_val.min((available - n_probe as u64) as usize);

    let mut rng = seed::rng(seed, &[0x5117]);
    let mut edges: Vec<Pair> = g.edges().collect();
    edges.shuffle(&mut rng);
    let probe = edges[..n_probe].to_vec();
    let validation = edges[n_probe..n_probe + n_val].to_vec();
    let train = edges[n_probe + n_val..].to_vec();

    let mut negatives = sample_non_edges(g, n_probe + n_val_neg, &mut rng)?;
    let validation_negatives = negatives.split_off(n_probe);
    Ok(SplitSample {
        seed,
        train,
        validation,
        probe,
        negatives,
        validation_negatives,
    })
}

/// Split seed of the `repeat`-th round.
pub fn repeat_seed(seed_base: u64, repeat: usize) -> u64 {
    seed_base.wrapping_add(repeat as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AucSetting {
    /// Exact up to 10^7 comparisons, sampled with 10^5 pairs beyond.
    #[default]
    Auto,
    Exact,
    Sampled(u64),
}

impl AucSetting {
    pub fn mode(self, ls: &LabeledScores, seed: u64) -> AucMode {
        match self {
            AucSetting::Auto => AucMode::auto(ls, seed),
            AucSetting::Exact => AucMode::Exact,
            AucSetting::Sampled(pairs) => AucMode::Sampled { pairs, seed },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalConfig {
    pub repeats: usize,
    pub auc: AucSetting,
    pub seed_base: u64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            repeats: 10,
            auc: AucSetting::Auto,
            seed_base: 0,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.repeats < 1 {
            return Err(Error::arg("repeats must be at least 1"));
        }
        if self.auc == AucSetting::Sampled(0) {
            return Err(Error::arg("sampled AUC needs at least one pair"));
        }
        Ok(())
    }
}

/// Something that can be trained on a graph and score node pairs under a
/// given configuration.
pub trait Trainable: Sync {
    type Config: Clone + Debug;

    fn name(&self) -> String;

    fn fit_score(&self, train: &Graph, config: &Self::Config, pairs: &[Pair], seed: u64) -> Result<Vec<f64>>;
}

impl Trainable for NativeAlgorithm {
    type Config = Hyperparams;

    fn name(&self) -> String {
        self.id().to_string()
    }

    fn fit_score(&self, train: &Graph, config: &Hyperparams, pairs: &[Pair], seed: u64) -> Result<Vec<f64>> {
        Ok(self.score(train, config, pairs, seed)?.scores)
    }
}

/// Outcome of a grid traversal.
#[derive(Debug, Clone)]
pub struct Selection<C> {
    pub index: usize,
    pub config: C,
    /// Validation AUC per grid point; `None` where training failed.
    pub validation_auc: Vec<Option<f64>>,
}

/// Trains on the training edges for each grid point, scores validation
/// positives against validation negatives by AUC and returns the best
/// configuration. Ties go to the earlier grid point; failing points are
/// skipped.
pub fn traverse_hyperparameters<P: Trainable>(
    predictor: &P,
    grid: &[P::Config],
    g: &Graph,
    split: &SplitSample,
    setting: AucSetting,
    seed: u64,
) -> Result<Selection<P::Config>> {
    if grid.is_empty() {
        return Err(Error::arg("empty hyperparameter grid"));
    }
    if grid.len() == 1 {
        return Ok(Selection {
            index: 0,
            config: grid[0].clone(),
            validation_auc: vec![None],
        });
    }
    if split.validation_negatives.is_empty() {
        return Err(Error::arg("no validation negatives available for model selection"));
    }
    let train = split.train_graph(g)?;
    let pairs = split.validation_pairs();
    let n_pos = split.validation.len();
    let mut aucs = Vec::with_capacity(grid.len());
    let mut best: Option<(usize, f64)> = None;
    for (k, config) in grid.iter().enumerate() {
        let result = predictor
            .fit_score(&train, config, &pairs, seed)
            .and_then(|s| LabeledScores::new(s[..n_pos].to_vec(), s[n_pos..].to_vec()))
            .and_then(|ls| auc(&ls, setting.mode(&ls, seed)));
        match result {
            Ok(v) => {
                if best.is_none_or(|(_, b)| v > b) {
                    best = Some((k, v));
                }
                aucs.push(Some(v));
            }
            Err(e) => {
                log::warn!("{} grid point {config:?} failed: {e}", predictor.name());
                aucs.push(None);
            }
        }
    }
    match best {
        Some((index, _)) => Ok(Selection {
            index,
            config: grid[index].clone(),
            validation_auc: aucs,
        }),
        None => Err(Error::AllConfigurationsFailed(predictor.name())),
    }
}
