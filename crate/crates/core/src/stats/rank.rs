use std::collections::HashMap;

use crate::error::{Error, Result};

/// Per-network algorithm ranks for one domain: row `i`, column `l` holds
/// the rank (1 = best) of algorithm `l` on network `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct RankMatrix {
    domain: String,
    networks: Vec<String>,
    algorithms: Vec<String>,
    ranks: Vec<Vec<u32>>,
}

impl RankMatrix {
    /// Wraps precomputed ranks; each row must be a permutation of `1..=m`.
    pub fn from_ranks(
        domain: impl Into<String>,
        networks: Vec<String>,
        algorithms: Vec<String>,
        ranks: Vec<Vec<u32>>,
    ) -> Result<Self> {
        let m = algorithms.len();
        if networks.len() != ranks.len() {
            return Err(Error::arg("one rank row per network is required"));
        }
        for (row, name) in ranks.iter().zip(&networks) {
            let mut seen = vec![false; m + 1];
            if row.len() != m
                || row
                    .iter()
                    .any(|&r| r == 0 || r as usize > m || std::mem::replace(&mut seen[r as usize], true))
            {
                return Err(Error::arg(format!(
                    "ranks for network `{name}` are not a permutation of 1..={m}"
                )));
            }
        }
        Ok(RankMatrix {
            domain: domain.into(),
            networks,
            algorithms,
            ranks,
        })
    }

    pub fn domain(&self) -> &str {
        &self.domain
    }

    pub fn networks(&self) -> &[String] {
        &self.networks
    }

    pub fn algorithms(&self) -> &[String] {
        &self.algorithms
    }

    pub fn rows(&self) -> &[Vec<u32>] {
        &self.ranks
    }

    /// Number of networks `u_p`.
    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    pub fn algorithm_count(&self) -> usize {
        self.algorithms.len()
    }

    pub(crate) fn row_f64(&self, i: usize) -> Vec<f64> {
        self.ranks[i].iter().map(|&r| r as f64).collect()
    }
}

/// Ranks algorithms on every network by descending mean metric. Ties go to
/// the algorithm registered first.
pub fn build_rank_matrix(
    domain: &str,
    networks: &[String],
    algorithms: &[String],
    mean_metric: &HashMap<(String, String), f64>,
) -> Result<RankMatrix> {
    if algorithms.is_empty() {
        return Err(Error::arg("no algorithms registered"));
    }
    let mut ranks = Vec::with_capacity(networks.len());
    for net in networks {
        let mut values = Vec::with_capacity(algorithms.len());
        for alg in algorithms {
            let v = mean_metric
                .get(&(net.clone(), alg.clone()))
                .copied()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::MissingCell {
                    network: net.clone(),
                    algorithm: alg.clone(),
                })?;
            values.push(v);
        }
        let mut order: Vec<usize> = (0..algorithms.len()).collect();
        // stable: equal values keep registration order
        order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
        let mut row = vec![0u32; algorithms.len()];
        for (pos, &alg) in order.iter().enumerate() {
            row[alg] = pos as u32 + 1;
        }
        ranks.push(row);
    }
    RankMatrix::from_ranks(domain, networks.to_vec(), algorithms.to_vec(), ranks)
}
