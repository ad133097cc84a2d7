//! Simple undirected, unweighted graphs.
//!
//! Every graph is canonicalized on construction: self-loops and parallel
//! edges are dropped, nodes get contiguous ids `0..n` and each adjacency
//! list is sorted. Original node labels travel with the graph so reports can
//! name nodes the way the input file did.

use std::cmp::Ordering;
use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Unordered node pair stored as `(i, j)` with `i < j`.
pub type Pair = (usize, usize);

#[inline]
pub fn canonical_pair(a: usize, b: usize) -> Pair {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Separator {
    /// Any run of whitespace and/or commas.
    Auto,
    Whitespace,
    Comma,
}

#[derive(Debug, Clone)]
pub struct ParseOptions {
    pub comment_prefix: String,
    pub separator: Separator,
    /// Drop repeated edges. When false a repeated edge is a parse error.
    pub dedupe: bool,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions {
            comment_prefix: "#".to_string(),
            separator: Separator::Auto,
            dedupe: true,
        }
    }
}

/// What canonicalization threw away while loading.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParseReport {
    pub lines: usize,
    pub duplicates: usize,
    pub self_loops: usize,
    /// Lines carrying weight/timestamp columns that were ignored.
    pub extra_columns: usize,
}

/// Immutable simple graph with sorted adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<Vec<usize>>,
    edge_count: usize,
    labels: Option<Vec<String>>,
}

/// Orders node labels numerically when both parse as integers, numbers
/// before non-numbers, everything else lexicographically.
pub fn label_order(a: &str, b: &str) -> Ordering {
    match (a.parse::<i64>(), b.parse::<i64>()) {
        (Ok(x), Ok(y)) => x.cmp(&y).then_with(|| a.cmp(b)),
        (Ok(_), Err(_)) => Ordering::Less,
        (Err(_), Ok(_)) => Ordering::Greater,
        (Err(_), Err(_)) => a.cmp(b),
    }
}

impl Graph {
    /// Builds a graph on `n` nodes, silently dropping self-loops and repeats.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Graph>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut adj = vec![Vec::new(); n];
        for (a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::arg(format!(
                    "edge ({a}, {b}) out of range for {n} nodes"
                )));
            }
            if a == b {
                continue;
            }
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut edge_count = 0;
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
            edge_count += list.len();
        }
        Ok(Graph {
            adj,
            edge_count: edge_count / 2,
            labels: None,
        })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Graph> {
        if labels.len() != self.node_count() {
            return Err(Error::arg(format!(
                "{} labels for {} nodes",
                labels.len(),
                self.node_count()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> Result<usize> {
        self.check_node(v)?;
        Ok(self.adj[v].len())
    }

    #[inline]
    pub(crate) fn deg(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        a < self.adj.len() && self.adj[a].binary_search(&b).is_ok()
    }

    /// Edges as `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = Pair> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(i, list)| list.iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Original label of `v`, or its decimal id when the graph is unlabeled.
    pub fn label(&self, v: usize) -> String {
        match &self.labels {
            Some(l) => l[v].clone(),
            None => v.to_string(),
        }
    }

    /// Map from original label to internal id.
    pub fn label_index(&self) -> HashMap<String, usize> {
        (0..self.node_count()).map(|v| (self.label(v), v)).collect()
    }

    fn check_node(&self, v: usize) -> Result<()> {
        if v >= self.node_count() {
            return Err(Error::arg(format!(
                "node {v} out of range (n = {})",
                self.node_count()
            )));
        }
        Ok(())
    }

    /// Checks the structural invariants; used after every load.
    pub fn validate(&self) -> Result<()> {
        let mut degree_sum = 0;
        for (v, list) in self.adj.iter().enumerate() {
            degree_sum += list.len();
            for w in list.windows(2) {
                if w[0] >= w[1] {
                    return Err(Error::arg(format!("adjacency of {v} not strictly sorted")));
                }
            }
            for &u in list {
                if u == v {
                    return Err(Error::arg(format!("self-loop at {v}")));
                }
                if self.adj[u].binary_search(&v).is_err() {
                    return Err(Error::arg(format!("asymmetric edge {v}->{u}")));
                }
            }
        }
        if degree_sum != 2 * self.edge_count {
            return Err(Error::arg("degree sum differs from 2m".to_string()));
        }
        Ok(())
    }

    /// Unweighted BFS distances from `source`; `None` marks unreachable nodes.
    pub fn shortest_path_lengths(&self, source: usize) -> Result<Vec<Option<u32>>> {
        self.check_node(source)?;
        let mut dist = vec![u32::MAX; self.node_count()];
        let mut queue = VecDeque::new();
        self.bfs(source, &mut dist, &mut queue);
        Ok(dist
            .into_iter()
            .map(|d| if d == u32::MAX { None } else { Some(d) })
            .collect())
    }

    /// BFS into a caller-owned buffer (`u32::MAX` = unreached). Returns the
    /// number of reached nodes.
    pub(crate) fn bfs(&self, source: usize, dist: &mut [u32], queue: &mut VecDeque<usize>) -> usize {
        dist.fill(u32::MAX);
        queue.clear();
        dist[source] = 0;
        queue.push_back(source);
        let mut reached = 1;
        while let Some(v) = queue.pop_front() {
            let next = dist[v] + 1;
            for &u in &self.adj[v] {
                if dist[u] == u32::MAX {
                    dist[u] = next;
                    reached += 1;
                    queue.push_back(u);
                }
            }
        }
        reached
    }

    /// Connected components, each sorted, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.node_count();
        let mut comp = vec![usize::MAX; n];
        let mut out = Vec::new();
        let mut stack = Vec::new();
        for start in 0..n {
            if comp[start] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut members = vec![start];
            comp[start] = id;
            stack.push(start);
            while let Some(v) = stack.pop() {
                for &u in &self.adj[v] {
                    if comp[u] == usize::MAX {
                        comp[u] = id;
                        members.push(u);
                        stack.push(u);
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }

    /// Induced subgraph on the largest component. Equal-sized components are
    /// resolved in favour of the one holding the smallest node id, which is
    /// the smallest original label because ids follow label order.
    pub fn largest_connected_component(&self) -> Graph {
        let comps = self.components();
        let best = comps
            .iter()
            .enumerate()
            .max_by(|(ia, a), (ib, b)| a.len().cmp(&b.len()).then(ib.cmp(ia)))
            .map(|(i, _)| i);
        match best {
            Some(i) if comps[i].len() == self.node_count() => self.clone(),
            Some(i) => self.induced_subgraph(&comps[i]),
            None => self.clone(),
        }
    }

    /// Subgraph induced by `nodes` (must be sorted and distinct); ids are
    /// reassigned in the given order and labels carried over.
    pub fn induced_subgraph(&self, nodes: &[usize]) -> Graph {
        let mut index = vec![usize::MAX; self.node_count()];
        for (new, &old) in nodes.iter().enumerate() {
            index[old] = new;
        }
        let mut adj = Vec::with_capacity(nodes.len());
        let mut edge_count = 0;
        for &old in nodes {
            let list: Vec<usize> = self.adj[old]
                .iter()
                .filter_map(|&u| (index[u] != usize::MAX).then_some(index[u]))
                .collect();
            edge_count += list.len();
            adj.push(list);
        }
        let labels = Some(nodes.iter().map(|&v| self.label(v)).collect());
        Graph {
            adj,
            edge_count: edge_count / 2,
            labels,
        }
    }

    /// Same graph with node `v` renamed to `perm[v]`. Labels follow their nodes.
    pub fn permuted(&self, perm: &[usize]) -> Result<Graph> {
        let n = self.node_count();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::arg("not a permutation".to_string()));
        }
        let g = Graph::from_edges(n, self.edges().map(|(a, b)| (perm[a], perm[b])))?;
        let mut labels = vec![String::new(); n];
        for v in 0..n {
            labels[perm[v]] = self.label(v);
        }
        g.with_labels(labels)
    }

    /// Graph on the same node set with a different edge list.
    pub fn with_edge_set<I>(&self, edges: I) -> Result<Graph>
    where
        I: IntoIterator<Item = Pair>,
    {
        let g = Graph::from_edges(self.node_count(), edges)?;
        Ok(Graph {
            labels: self.labels.clone(),
            ..g
        })
    }

    /// Canonical edge-list text: one `label_i label_j` line per edge, edges
    /// sorted by internal id with `i < j`, newline-terminated.
    pub fn write_canonical<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for (i, j) in self.edges() {
            match &self.labels {
                Some(l) => writeln!(w, "{} {}", l[i], l[j])?,
                None => writeln!(w, "{i} {j}")?,
            }
        }
        Ok(())
    }

    pub fn canonical_string(&self) -> String {
        let mut s = String::with_capacity(self.edge_count * 8);
        for (i, j) in self.edges() {
            match &self.labels {
                Some(l) => {
                    let _ = writeln!(s, "{} {}", l[i], l[j]);
                }
                None => {
                    let _ = writeln!(s, "{i} {j}");
                }
            }
        }
        s
    }

    /// Hex SHA-256 of the canonical serialization; cache key for derived data.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.canonical_string().as_bytes());
        hex::encode(h.finalize())
    }

    pub fn candidate_space(&self) -> CandidateSpace<'_> {
        CandidateSpace { graph: self }
    }
}

/// The set `U` of all unordered node pairs and its split into observed
/// edges and non-edges.
#[derive(Debug, Clone, Copy)]
pub struct CandidateSpace<'g> {
    graph: &'g Graph,
}

impl CandidateSpace<'_> {
    pub fn universe_size(&self) -> u64 {
        let n = self.graph.node_count() as u64;
        n * n.saturating_sub(1) / 2
    }

    pub fn non_edge_count(&self) -> u64 {
        self.universe_size() - self.graph.edge_count() as u64
    }

    pub fn is_edge(&self, pair: Pair) -> bool {
        let (i, j) = canonical_pair(pair.0, pair.1);
        self.graph.has_edge(i, j)
    }
}

fn split_tokens(line: &str, sep: Separator) -> Vec<&str> {
    match sep {
        Separator::Whitespace => line.split_whitespace().collect(),
        Separator::Comma => line.split(',').map(str::trim).collect(),
        Separator::Auto => line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .collect(),
    }
}

/// Reads an edge list, canonicalizing as it goes.
///
/// Lines hold two node tokens; up to two trailing columns (weights,
/// timestamps) are ignored with a warning since only the unweighted,
/// undirected structure is used.
pub fn parse_edge_list<R: BufRead>(reader: R, opts: &ParseOptions) -> Result<(Graph, ParseReport)> {
    let mut report = ParseReport::default();
    let mut raw: Vec<(String, String)> = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::Parse {
            line: lineno,
            message: e.to_string(),
        })?;
        let trimmed = line.trim();
        if trimmed.is_empty()
            || (!opts.comment_prefix.is_empty() && trimmed.starts_with(&opts.comment_prefix))
        {
            continue;
        }
        report.lines += 1;
        let tokens = split_tokens(trimmed, opts.separator);
        match tokens.len() {
            2 => {}
            3 | 4 => report.extra_columns += 1,
            k => {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("expected 2 node tokens, found {k}"),
                })
            }
        }
        if tokens[0].is_empty() || tokens[1].is_empty() {
            return Err(Error::Parse {
                line: lineno,
                message: "empty node token".to_string(),
            });
        }
        raw.push((tokens[0].to_string(), tokens[1].to_string()));
    }
    if report.extra_columns > 0 {
        log::warn!(
            "{} lines carried extra columns; treating the graph as undirected and unweighted",
            report.extra_columns
        );
    }

    let mut names: Vec<&str> = raw.iter().flat_map(|(a, b)| [a.as_str(), b.as_str()]).collect();
    names.sort_unstable_by(|a, b| label_order(a, b));
    names.dedup();
    let index: HashMap<&str, usize> = names.iter().enumerate().map(|(i, &s)| (s, i)).collect();

    let mut seen = std::collections::HashSet::with_capacity(raw.len());
    let mut edges = Vec::with_capacity(raw.len());
    for (lineno, (a, b)) in raw.iter().enumerate() {
        let (i, j) = (index[a.as_str()], index[b.as_str()]);
        if i == j {
            report.self_loops += 1;
            continue;
        }
        let pair = canonical_pair(i, j);
        if !seen.insert(pair) {
            if !opts.dedupe {
                return Err(Error::Parse {
                    line: lineno + 1,
                    message: format!("duplicate edge {a} {b}"),
                });
            }
            report.duplicates += 1;
            continue;
        }
        edges.push(pair);
    }
    if edges.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let labels = names.iter().map(|s| s.to_string()).collect();
    let g = Graph::from_edges(index.len(), edges)?.with_labels(labels)?;
    g.validate()?;
    if report.duplicates + report.self_loops > 0 {
        log::debug!(
            "dropped {} duplicate edges and {} self-loops",
            report.duplicates,
            report.self_loops
        );
    }
    Ok((g, report))
}

pub fn read_edge_list(path: &Path, opts: &ParseOptions) -> Result<(Graph, ParseReport)> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_edge_list(std::io::BufReader::new(file), opts)
}
