//! Ranking metrics over probe positives and sampled negatives.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::seed;

pub const METRIC_NAMES: [&str; 4] = ["auc", "precision", "aupr", "ndcg"];

/// Above this many positive-negative pairs the default AUC switches to the
/// sampled estimator.
pub const EXACT_AUC_PAIR_LIMIT: u64 = 10_000_000;
pub const DEFAULT_AUC_SAMPLES: u64 = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledScores {
    positives: Vec<f64>,
    negatives: Vec<f64>,
}

impl LabeledScores {
    pub fn new(positives: Vec<f64>, negatives: Vec<f64>) -> Result<Self> {
        if positives.is_empty() || negatives.is_empty() {
            return Err(Error::arg("both positive and negative scores are required"));
        }
        if positives.iter().chain(&negatives).any(|s| !s.is_finite()) {
            return Err(Error::Numerical("non-finite score".to_string()));
        }
        Ok(LabeledScores {
            positives,
            negatives,
        })
    }

    pub fn positives(&self) -> &[f64] {
        &self.positives
    }

    pub fn negatives(&self) -> &[f64] {
        &self.negatives
    }

    /// Pooled `(score, is_positive)` sorted by descending score; within a
    /// tie negatives come first (pessimistic ordering).
    fn pooled_pessimistic(&self) -> Vec<(f64, bool)> {
        let mut pooled: Vec<(f64, bool)> = self
            .positives
            .iter()
            .map(|&s| (s, true))
            .chain(self.negatives.iter().map(|&s| (s, false)))
            .collect();
        pooled.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        pooled
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AucMode {
    Exact,
    Sampled { pairs: u64, seed: u64 },
}

impl AucMode {
    /// Exact when cheap, otherwise `DEFAULT_AUC_SAMPLES` random comparisons.
    pub fn auto(ls: &LabeledScores, seed: u64) -> AucMode {
        let work = ls.positives.len() as u64 * ls.negatives.len() as u64;
        if work <= EXACT_AUC_PAIR_LIMIT {
            AucMode::Exact
        } else {
            AucMode::Sampled {
                pairs: DEFAULT_AUC_SAMPLES,
                seed,
            }
        }
    }
}

pub fn auc(ls: &LabeledScores, mode: AucMode) -> Result<f64> {
    match mode {
        AucMode::Exact => Ok(auc_exact(ls)),
        AucMode::Sampled { pairs, seed } => auc_sampled(ls, pairs, seed),
    }
}

/// P(pos > neg) + 0.5 P(pos = neg), via mid-ranks of the pooled sample.
fn auc_exact(ls: &LabeledScores) -> f64 {
    let mut pooled: Vec<(f64, bool)> = ls
        .positives
        .iter()
        .map(|&s| (s, true))
        .chain(ls.negatives.iter().map(|&s| (s, false)))
        .collect();
    pooled.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut pos_rank_sum = 0.0;
    let mut i = 0;
    while i < pooled.len() {
        let mut j = i;
        while j < pooled.len() && pooled[j].0 == pooled[i].0 {
            j += 1;
        }
        // 1-based ranks i+1..=j share the mid-rank
        let mid = (i + 1 + j) as f64 / 2.0;
        let npos = pooled[i..j].iter().filter(|p| p.1).count();
        pos_rank_sum += mid * npos as f64;
        i = j;
    }
    let np = ls.positives.len() as f64;
    let nn = ls.negatives.len() as f64;
    (pos_rank_sum - np * (np + 1.0) / 2.0) / (np * nn)
}

/// `(N1 + 0.5 N2) / N` over `pairs` uniformly drawn positive/negative pairs.
fn auc_sampled(ls: &LabeledScores, pairs: u64, seed: u64) -> Result<f64> {
    if pairs == 0 {
        return Err(Error::arg("AUC sample count must be positive"));
    }
    let mut rng = seed::rng(seed, &[0xA0C]);
    let (mut higher, mut equal) = (0u64, 0u64);
    for _ in 0..pairs {
        let p = ls.positives[rng.random_range(0..ls.positives.len())];
        let n = ls.negatives[rng.random_range(0..ls.negatives.len())];
        if p > n {
            higher += 1;
        } else if p == n {
            equal += 1;
        }
    }
    Ok((higher as f64 + 0.5 * equal as f64) / pairs as f64)
}

/// Fraction of positives among the top-|positives| pooled scores.
pub fn precision_at_probe(ls: &LabeledScores) -> f64 {
    let k = ls.positives.len();
    let hits = ls.pooled_pessimistic().iter().take(k).filter(|p| p.1).count();
    hits as f64 / k as f64
}

/// Step-interpolated area under the precision-recall curve: the sum over
/// distinct descending thresholds of (recall gain) x (precision at that
/// threshold). Tied scores enter together.
pub fn aupr(ls: &LabeledScores) -> f64 {
    let pooled = ls.pooled_pessimistic();
    let total_pos = ls.positives.len() as f64;
    let (mut tp, mut seen) = (0usize, 0usize);
    let mut prev_recall = 0.0;
    let mut area = 0.0;
    let mut i = 0;
    while i < pooled.len() {
        let mut j = i;
        while j < pooled.len() && pooled[j].0 == pooled[i].0 {
            if pooled[j].1 {
                tp += 1;
            }
            j += 1;
        }
        seen = j;
        let recall = tp as f64 / total_pos;
        let precision = tp as f64 / seen as f64;
        area += (recall - prev_recall) * precision;
        prev_recall = recall;
        i = j;
    }
    debug_assert_eq!(seen, pooled.len());
    area
}

/// NDCG with binary relevance and log2 discounting over the pooled ranking.
pub fn ndcg(ls: &LabeledScores) -> f64 {
    let pooled = ls.pooled_pessimistic();
    let dcg: f64 = pooled
        .iter()
        .enumerate()
        .filter(|(_, p)| p.1)
        .map(|(rank, _)| 1.0 / ((rank + 2) as f64).log2())
        .sum();
    let ideal: f64 = (0..ls.positives.len())
        .map(|rank| 1.0 / ((rank + 2) as f64).log2())
        .sum();
    dcg / ideal
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricReport {
    pub auc: f64,
    pub precision: f64,
    pub aupr: f64,
    pub ndcg: f64,
    pub auc_sampled: bool,
}

impl MetricReport {
    pub fn compute(ls: &LabeledScores, seed: u64) -> Result<MetricReport> {
        Self::compute_with(ls, AucMode::auto(ls, seed))
    }

    pub fn compute_with(ls: &LabeledScores, mode: AucMode) -> Result<MetricReport> {
        Ok(MetricReport {
            auc: auc(ls, mode)?,
            precision: precision_at_probe(ls),
            aupr: aupr(ls),
            ndcg: ndcg(ls),
            auc_sampled: matches!(mode, AucMode::Sampled { .. }),
        })
    }

    /// `(name, value)` in the fixed record order.
    pub fn named(&self) -> [(&'static str, f64); 4] {
        [
            ("auc", self.auc),
            ("precision", self.precision),
            ("aupr", self.aupr),
            ("ndcg", self.ndcg),
        ]
    }
}
