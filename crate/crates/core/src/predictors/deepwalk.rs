use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, Pair};
use crate::seed::{self, TaskRng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeepWalkParams {
    pub walk_length: usize,
    pub walks_per_node: usize,
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub learning_rate: f64,
}

impl Default for DeepWalkParams {
    fn default() -> Self {
        DeepWalkParams {
            walk_length: 40,
            walks_per_node: 10,
            dim: 32,
            window: 5,
            negatives: 5,
            learning_rate: 0.025,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DeepWalkModel {
    pub dim: usize,
    /// `n x dim`, row-major.
    pub embeddings: Vec<f64>,
    /// Nodes without edges; they keep their initial vectors.
    pub isolated: Vec<usize>,
}

impl DeepWalkModel {
    pub fn vector(&self, v: usize) -> &[f64] {
        &self.embeddings[v * self.dim..(v + 1) * self.dim]
    }

    pub fn score(&self, i: usize, j: usize) -> f64 {
        self.vector(i).iter().zip(self.vector(j)).map(|(a, b)| a * b).sum()
    }
}

fn walks(g: &Graph, p: &DeepWalkParams, rng: &mut TaskRng) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..g.node_count()).filter(|&v| g.deg(v) > 0).collect();
    let mut out = Vec::with_capacity(order.len() * p.walks_per_node);
    for _ in 0..p.walks_per_node {
        order.shuffle(rng);
        for &start in &order {
            let mut walk = Vec::with_capacity(p.walk_length);
            walk.push(start);
            let mut cur = start;
            while walk.len() < p.walk_length {
                let nb = g.neighbors(cur);
                cur = nb[rng.random_range(0..nb.len())];
                walk.push(cur);
            }
            out.push(walk);
        }
    }
    out
}

/// Cumulative unigram^0.75 distribution for negative sampling.
struct NoiseTable {
    cumulative: Vec<f64>,
}

impl NoiseTable {
    fn new(counts: &[u64]) -> Self {
        let mut acc = 0.0;
        let cumulative = counts
            .iter()
            .map(|&c| {
                acc += (c as f64).powf(0.75);
                acc
            })
            .collect();
        NoiseTable { cumulative }
    }

    fn sample(&self, rng: &mut TaskRng) -> usize {
        let total = *self.cumulative.last().expect("non-empty table");
        let x = rng.random::<f64>() * total;
        self.cumulative.partition_point(|&c| c <= x).min(self.cumulative.len() - 1)
    }
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    if x > 30.0 {
        1.0
    } else if x < -30.0 {
        0.0
    } else {
        1.0 / (1.0 + (-x).exp())
    }
}

/// Uniform random walks followed by one pass of skip-gram with negative
/// sampling. The learning rate decays linearly over the corpus.
pub fn train_deepwalk(g: &Graph, p: &DeepWalkParams, seed: u64) -> Result<DeepWalkModel> {
    if g.edge_count() == 0 {
        return Err(Error::arg("DeepWalk needs at least one edge"));
    }
    if p.dim == 0 || p.window == 0 || p.walk_length < 2 || p.walks_per_node == 0 {
        return Err(Error::arg(format!("invalid DeepWalk parameters {p:?}")));
    }
    let n = g.node_count();
    let d = p.dim;
    let mut rng = seed::rng(seed, &[0xD33F]);
    let mut emb: Vec<f64> = (0..n * d).map(|_| (rng.random::<f64>() - 0.5) / d as f64).collect();
    let mut ctx = vec![0.0; n * d];
    let corpus = walks(g, p, &mut rng);

    let mut counts = vec![0u64; n];
    for w in &corpus {
        for &v in w {
            counts[v] += 1;
        }
    }
    let noise = NoiseTable::new(&counts);
    let total_tokens: usize = corpus.iter().map(Vec::len).sum();
    let min_lr = p.learning_rate * 1e-4;
    let mut processed = 0usize;
    let mut grad = vec![0.0; d];

    for walk in &corpus {
        for (pos, &center) in walk.iter().enumerate() {
            let lr = (p.learning_rate * (1.0 - processed as f64 / total_tokens as f64)).max(min_lr);
            processed += 1;
            let reduced = rng.random_range(0..p.window);
            let span = p.window - reduced;
            let lo = pos.saturating_sub(span);
            let hi = (pos + span).min(walk.len() - 1);
            for (cpos, &context) in walk.iter().enumerate().take(hi + 1).skip(lo) {
                if cpos == pos {
                    continue;
                }
                grad.fill(0.0);
                let h = center * d;
                for s in 0..=p.negatives {
                    let (target, label) = if s == 0 {
                        (context, 1.0)
                    } else {
                        let t = noise.sample(&mut rng);
                        if t == context {
                            continue;
                        }
                        (t, 0.0)
                    };
                    let t = target * d;
                    let dot: f64 = (0..d).map(|x| emb[h + x] * ctx[t + x]).sum();
                    let gcoef = (label - sigmoid(dot)) * lr;
                    for x in 0..d {
                        grad[x] += gcoef * ctx[t + x];
                        ctx[t + x] += gcoef * emb[h + x];
                    }
                }
                for x in 0..d {
                    emb[h + x] += grad[x];
                }
            }
        }
    }
    if emb.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite DeepWalk embedding".to_string()));
    }
    let isolated: Vec<usize> = (0..n).filter(|&v| g.deg(v) == 0).collect();
    if !isolated.is_empty() {
        log::debug!("{} isolated nodes keep their initial embeddings", isolated.len());
    }
    Ok(DeepWalkModel {
        dim: d,
        embeddings: emb,
        isolated,
    })
}

/// Inner product of the trained node embeddings.
pub fn deepwalk_scores(g: &Graph, pairs: &[Pair], p: &DeepWalkParams, seed: u64) -> Result<Vec<f64>> {
    let n = g.node_count();
    if let Some(q) = pairs.iter().find(|&&(i, j)| i >= n || j >= n) {
        return Err(Error::arg(format!("query pair {q:?} out of range (n = {n})")));
    }
    let model = train_deepwalk(g, p, seed)?;
    Ok(pairs.iter().map(|&(i, j)| model.score(i, j)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> DeepWalkParams {
        DeepWalkParams {
            walk_length: 20,
            walks_per_node: 5,
            dim: 8,
            window: 3,
            ..DeepWalkParams::default()
        }
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let g = Graph::from_edges(10, (0..10).map(|i| (i, (i + 1) % 10))).unwrap();
        let pairs = [(0, 5), (1, 2), (3, 7)];
        let a = deepwalk_scores(&g, &pairs, &small(), 42).unwrap();
        let b = deepwalk_scores(&g, &pairs, &small(), 42).unwrap();
        assert_eq!(a, b);
        let c = deepwalk_scores(&g, &pairs, &small(), 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn shape_and_isolated_nodes() {
        let g = Graph::from_edges(6, [(0, 1), (1, 2), (2, 0)]).unwrap();
        let m = train_deepwalk(&g, &small(), 1).unwrap();
        assert_eq!(m.embeddings.len(), 6 * 8);
        for v in 0..6 {
            assert_eq!(m.vector(v).len(), 8);
            assert!(m.vector(v).iter().all(|x| x.is_finite()));
        }
        assert_eq!(m.isolated, vec![3, 4, 5]);
    }

    #[test]
    fn rejects_edgeless_graph() {
        let g = Graph::from_edges(3, []).unwrap();
        assert!(train_deepwalk(&g, &small(), 0).is_err());
    }
}
