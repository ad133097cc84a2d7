//! Topology descriptors used to characterize a corpus.

use std::collections::VecDeque;

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::{par, seed};

/// Largest component size for which distances come from BFS out of every node.
pub const EXACT_DISTANCE_LIMIT: usize = 5000;
/// BFS sources used above the limit.
pub const SAMPLED_SOURCES: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceStats {
    pub diameter: u32,
    pub avg_distance: f64,
    /// Values are estimates from sampled sources.
    pub estimated: bool,
    /// The component has a single node.
    pub degenerate: bool,
}

/// Diameter and average distance of the largest connected component.
pub fn distance_stats(g: &Graph, seed: u64) -> DistanceStats {
    distance_stats_with(g, EXACT_DISTANCE_LIMIT, SAMPLED_SOURCES, seed)
}

pub fn distance_stats_with(g: &Graph, exact_limit: usize, sources: usize, seed: u64) -> DistanceStats {
    let lcc = g.largest_connected_component();
    let n = lcc.node_count();
    if n < 2 {
        return DistanceStats {
            diameter: 0,
            avg_distance: 0.0,
            estimated: false,
            degenerate: true,
        };
    }
    let estimated = n > exact_limit;
    let starts: Vec<usize> = if estimated {
        let mut rng = seed::rng(seed, &[0xD157]);
        let mut s = index::sample(&mut rng, n, sources.min(n)).into_vec();
        s.sort_unstable();
        s
    } else {
        (0..n).collect()
    };
    let per_source = par::map_slice(&starts, |&s| {
        let mut dist = vec![u32::MAX; n];
        let mut queue = VecDeque::new();
        lcc.bfs(s, &mut dist, &mut queue);
        let ecc = dist.iter().copied().max().unwrap_or(0);
        let total: u64 = dist.iter().map(|&d| d as u64).sum();
        (ecc, total)
    });
    let diameter = per_source.iter().map(|p| p.0).max().unwrap_or(0);
    let total: u64 = per_source.iter().map(|p| p.1).sum();
    let avg_distance = total as f64 / (starts.len() as f64 * (n - 1) as f64);
    DistanceStats {
        diameter,
        avg_distance,
        estimated,
        degenerate: false,
    }
}

/// Shannon entropy (bits) of the degree distribution.
pub fn degree_entropy(g: &Graph) -> f64 {
    let n = g.node_count();
    if n == 0 {
        return 0.0;
    }
    let max_deg = (0..n).map(|v| g.deg(v)).max().unwrap_or(0);
    let mut counts = vec![0usize; max_deg + 1];
    for v in 0..n {
        counts[g.deg(v)] += 1;
    }
    let h: f64 = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n as f64;
            -p * p.log2()
        })
        .sum();
    // a single degree class gives -1 * log2(1) = -0.0
    h.max(0.0)
}

/// Global transitivity `3 * triangles / connected triples`; `None` when the
/// graph has no connected triple.
pub fn clustering_coefficient(g: &Graph) -> Option<f64> {
    let n = g.node_count();
    let triples: u64 = (0..n)
        .map(|v| {
            let d = g.deg(v) as u64;
            d * d.saturating_sub(1) / 2
        })
        .sum();
    if triples == 0 {
        return None;
    }
    // each triangle counted once via i < j < k
    let mut triangles = 0u64;
    for i in 0..n {
        let ni = g.neighbors(i);
        for &j in ni.iter().filter(|&&j| j > i) {
            let nj = g.neighbors(j);
            let (mut a, mut b) = (ni.partition_point(|&x| x <= j), nj.partition_point(|&x| x <= j));
            while a < ni.len() && b < nj.len() {
                match ni[a].cmp(&nj[b]) {
                    std::cmp::Ordering::Less => a += 1,
                    std::cmp::Ordering::Greater => b += 1,
                    std::cmp::Ordering::Equal => {
                        triangles += 1;
                        a += 1;
                        b += 1;
                    }
                }
            }
        }
    }
    Some(3.0 * triangles as f64 / triples as f64)
}

/// `Q = sum_c [ l_c / m - (d_c / 2m)^2 ]` where `l_c` counts edges inside
/// community `c` and `d_c` sums the degrees of its members.
pub fn modularity_of(g: &Graph, membership: &[usize]) -> Result<f64> {
    let m = g.edge_count();
    if m == 0 {
        return Err(Error::Undefined("modularity of a graph without edges".to_string()));
    }
    if membership.len() != g.node_count() {
        return Err(Error::arg("membership must cover every node"));
    }
    let k = membership.iter().copied().max().map_or(0, |x| x + 1);
    let mut inner = vec![0usize; k];
    let mut degree = vec![0usize; k];
    for v in 0..g.node_count() {
        degree[membership[v]] += g.deg(v);
    }
    for (i, j) in g.edges() {
        if membership[i] == membership[j] {
            inner[membership[i]] += 1;
        }
    }
    let m = m as f64;
    Ok(inner
        .iter()
        .zip(&degree)
        .map(|(&l, &d)| l as f64 / m - (d as f64 / (2.0 * m)).powi(2))
        .sum())
}

const MAX_PASSES: usize = 1000;

/// Weighted graph used between Louvain levels.
struct Level {
    /// `(neighbour, weight)`; self-loops carry intra-community weight.
    adj: Vec<Vec<(usize, f64)>>,
    strength: Vec<f64>,
    total: f64,
}

impl Level {
    fn from_graph(g: &Graph) -> Level {
        let adj: Vec<Vec<(usize, f64)>> = (0..g.node_count())
            .map(|v| g.neighbors(v).iter().map(|&u| (u, 1.0)).collect())
            .collect();
        let strength = (0..g.node_count()).map(|v| g.deg(v) as f64).collect();
        Level {
            adj,
            strength,
            total: 2.0 * g.edge_count() as f64,
        }
    }

    /// One local-moving phase; returns the community of every node.
    fn local_moves(&self) -> (Vec<usize>, bool) {
        let n = self.adj.len();
        let mut comm: Vec<usize> = (0..n).collect();
        let mut comm_strength = self.strength.clone();
        let mut improved = false;
        let mut link = vec![0.0; n];
        let mut touched = Vec::new();
        for _ in 0..MAX_PASSES {
            let mut moved = false;
            for v in 0..n {
                let cv = comm[v];
                let kv = self.strength[v];
                touched.clear();
                for &(u, w) in &self.adj[v] {
                    if u == v {
                        continue;
                    }
                    if link[comm[u]] == 0.0 {
                        touched.push(comm[u]);
                    }
                    link[comm[u]] += w;
                }
                comm_strength[cv] -= kv;
                let gain = |c: usize| link[c] - comm_strength[c] * kv / self.total;
                let mut best = cv;
                let mut best_gain = gain(cv);
                touched.sort_unstable();
                // strict improvement only; scanning ids upwards keeps the smallest
                for &c in &touched {
                    let gc = gain(c);
                    if gc > best_gain + 1e-12 {
                        best = c;
                        best_gain = gc;
                    }
                }
                comm_strength[best] += kv;
                if best != cv {
                    comm[v] = best;
                    moved = true;
                    improved = true;
                }
                for &c in &touched {
                    link[c] = 0.0;
                }
            }
            if !moved {
                break;
            }
        }
        (comm, improved)
    }

    fn aggregate(&self, comm: &[usize]) -> (Level, Vec<usize>) {
        let mut ids: Vec<usize> = comm.to_vec();
        ids.sort_unstable();
        ids.dedup();
        let mut remap = vec![usize::MAX; self.adj.len()];
        for (new, &old) in ids.iter().enumerate() {
            remap[old] = new;
        }
        let k = ids.len();
        let mut weights: Vec<std::collections::BTreeMap<usize, f64>> = vec![Default::default(); k];
        let mut strength = vec![0.0; k];
        for v in 0..self.adj.len() {
            let cv = remap[comm[v]];
            strength[cv] += self.strength[v];
            for &(u, w) in &self.adj[v] {
                *weights[cv].entry(remap[comm[u]]).or_insert(0.0) += w;
            }
        }
        let adj = weights.into_iter().map(|m| m.into_iter().collect()).collect();
        let mapping = comm.iter().map(|&c| remap[c]).collect();
        (
            Level {
                adj,
                strength,
                total: self.total,
            },
            mapping,
        )
    }
}

/// Greedy multi-level modularity maximization (Louvain). Nodes are visited
/// in id order and ties go to the smallest community id, so the partition is
/// fully determined by the graph.
pub fn detect_communities(g: &Graph) -> Vec<usize> {
    let n = g.node_count();
    let mut membership: Vec<usize> = (0..n).collect();
    if g.edge_count() == 0 {
        return membership;
    }
    let mut level = Level::from_graph(g);
    loop {
        let (comm, improved) = level.local_moves();
        if !improved {
            break;
        }
        let (next, mapping) = level.aggregate(&comm);
        for m in &mut membership {
            *m = mapping[*m];
        }
        if next.adj.len() == level.adj.len() {
            break;
        }
        level = next;
    }
    membership
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModularityResult {
    pub q: f64,
    pub membership: Vec<usize>,
}

/// Modularity of the partition found by [`detect_communities`].
pub fn modularity(g: &Graph) -> Result<ModularityResult> {
    if g.edge_count() == 0 {
        return Err(Error::Undefined("modularity of a graph without edges".to_string()));
    }
    let membership = detect_communities(g);
    let q = modularity_of(g, &membership)?;
    Ok(ModularityResult { q, membership })
}

pub fn density(g: &Graph) -> f64 {
    let n = g.node_count() as f64;
    if n < 2.0 {
        return 0.0;
    }
    2.0 * g.edge_count() as f64 / (n * (n - 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologyFeatureSet {
    pub diameter: u32,
    pub degree_entropy: f64,
    pub clustering: f64,
    pub modularity: f64,
    pub avg_distance: f64,
    pub density: f64,
    pub flags: Vec<String>,
}

impl TopologyFeatureSet {
    pub fn flags_field(&self) -> String {
        self.flags.join(";")
    }
}

pub fn topology_features(g: &Graph, seed: u64) -> Result<TopologyFeatureSet> {
    let dist = distance_stats(g, seed);
    let mut flags = Vec::new();
    if dist.estimated {
        flags.push("distance_estimated".to_string());
    }
    if dist.degenerate {
        flags.push("distance_degenerate".to_string());
    }
    let clustering = match clustering_coefficient(g) {
        Some(c) => c,
        None => {
            flags.push("clustering_degenerate".to_string());
            0.0
        }
    };
    Ok(TopologyFeatureSet {
        diameter: dist.diameter,
        degree_entropy: degree_entropy(g),
        clustering,
        modularity: modularity(g)?.q,
        avg_distance: dist.avg_distance,
        density: density(g),
        flags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> Graph {
        Graph::from_edges(n, (0..n - 1).map(|i| (i, i + 1))).unwrap()
    }

    fn complete(n: usize) -> Graph {
        Graph::from_edges(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j)))).unwrap()
    }

    #[test]
    fn distances() {
        let d = distance_stats(&path(4), 0);
        assert_eq!(d.diameter, 3);
        assert!((d.avg_distance - 10.0 / 6.0).abs() < 1e-12);
        let k5 = distance_stats(&complete(5), 0);
        assert_eq!((k5.diameter, k5.avg_distance), (1, 1.0));
        let single = Graph::from_edges(1, []).unwrap();
        assert!(distance_stats(&single, 0).degenerate);
    }

    #[test]
    fn distances_use_the_lcc() {
        // path of 4 plus a separate edge
        let g = Graph::from_edges(6, [(0, 1), (1, 2), (2, 3), (4, 5)]).unwrap();
        let d = distance_stats(&g, 0);
        assert_eq!(d.diameter, 3);
    }

    #[test]
    fn sampled_estimates_never_exceed_exact() {
        let g = Graph::from_edges(60, (0..60).flat_map(|i| [(i, (i + 1) % 60), (i, (i * 7 + 3) % 60)])).unwrap();
        let exact = distance_stats_with(&g, 1000, 10, 0);
        for s in 0..5 {
            let est = distance_stats_with(&g, 10, 8, s);
            assert!(est.estimated);
            assert!(est.diameter <= exact.diameter);
        }
    }

    #[test]
    fn entropy() {
        let cycle = Graph::from_edges(6, (0..6).map(|i| (i, (i + 1) % 6))).unwrap();
        assert_eq!(degree_entropy(&cycle), 0.0);
        let star = Graph::from_edges(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
        let expect = -(0.25f64 * 0.25f64.log2() + 0.75 * 0.75f64.log2());
        assert!((degree_entropy(&star) - expect).abs() < 1e-12);
        assert!((expect - 0.8113).abs() < 1e-4);
    }

    #[test]
    fn clustering() {
        assert_eq!(clustering_coefficient(&complete(3)), Some(1.0));
        let star = Graph::from_edges(5, (1..5).map(|v| (0, v))).unwrap();
        assert_eq!(clustering_coefficient(&star), Some(0.0));
        let edge = Graph::from_edges(2, [(0, 1)]).unwrap();
        assert_eq!(clustering_coefficient(&edge), None);
    }

    #[test]
    fn modularity_examples() {
        let g = complete(5);
        assert!(modularity_of(&g, &[0; 5]).unwrap().abs() < 1e-15);
        let mut edges: Vec<(usize, usize)> = Vec::new();
        for base in [0, 4] {
            for i in 0..4 {
                for j in i + 1..4 {
                    edges.push((base + i, base + j));
                }
            }
        }
        let two_k4 = Graph::from_edges(8, edges).unwrap();
        let q = modularity_of(&two_k4, &[0, 0, 0, 0, 1, 1, 1, 1]).unwrap();
        assert!((q - 0.5).abs() < 1e-15);
        let found = modularity(&two_k4).unwrap();
        assert!((found.q - 0.5).abs() < 1e-12);
        assert!(modularity(&Graph::from_edges(3, []).unwrap()).is_err());
    }

    #[test]
    fn louvain_separates_ring_of_cliques() {
        let mut edges = Vec::new();
        for c in 0..6 {
            let b = c * 5;
            for i in 0..5 {
                for j in i + 1..5 {
                    edges.push((b + i, b + j));
                }
            }
            edges.push((b + 4, (b + 5) % 30));
        }
        let g = Graph::from_edges(30, edges).unwrap();
        let r = modularity(&g).unwrap();
        for c in 0..6 {
            let first = r.membership[c * 5];
            assert!((0..5).all(|i| r.membership[c * 5 + i] == first));
        }
        let distinct: std::collections::BTreeSet<usize> = r.membership.iter().copied().collect();
        assert_eq!(distinct.len(), 6);
    }

    #[test]
    fn density_and_features() {
        let g = complete(4);
        assert_eq!(density(&g), 1.0);
        let f = topology_features(&path(5), 0).unwrap();
        assert_eq!(f.diameter, 4);
        assert_eq!(f.clustering, 0.0);
        assert!(f.flags.is_empty());
        assert!(f.avg_distance <= f.diameter as f64);
    }
}
