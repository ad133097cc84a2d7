use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::{par, seed};

use super::pca::PcaEmbedding;

pub const DEFAULT_PERMUTATIONS: usize = 2000;

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Mean Euclidean distance over ordered pairs of distinct networks in `domain`.
pub fn intra_domain_distance(e: &PcaEmbedding, domain: &str) -> Result<f64> {
    let members: Vec<usize> = (0..e.labels.len()).filter(|&i| e.labels[i] == domain).collect();
    let u = members.len();
    if u < 2 {
        return Err(Error::Undefined(format!(
            "domain `{domain}` has {u} networks; mean intra-domain distance needs two"
        )));
    }
    let mut sum = 0.0;
    for (a, &i) in members.iter().enumerate() {
        for &k in &members[a + 1..] {
            sum += 2.0 * euclidean(&e.coords[i], &e.coords[k]);
        }
    }
    Ok(sum / (u * (u - 1)) as f64)
}

/// Mean distance between two distinct networks of the whole embedding: the
/// expected value of every pseudo-domain's intra distance under random labels.
pub fn global_mean_distance(e: &PcaEmbedding) -> f64 {
    let n = e.coords.len();
    if n < 2 {
        return 0.0;
    }
    let mut sum = 0.0;
    for i in 0..n {
        for k in i + 1..n {
            sum += euclidean(&e.coords[i], &e.coords[k]);
        }
    }
    sum / (n * (n - 1) / 2) as f64
}

#[derive(Debug, Clone)]
pub struct DomainPermutation {
    pub domain: String,
    pub size: usize,
    pub observed: f64,
    /// One pseudo-domain intra distance per permutation.
    pub null: Vec<f64>,
    pub null_mean: f64,
    /// `(#{null <= observed} + 1) / (B + 1)`.
    pub p_value: f64,
}

#[derive(Debug, Clone)]
pub struct PermutationResult {
    pub permutations: usize,
    /// Domains with fewer than two networks are left out.
    pub domains: Vec<DomainPermutation>,
    /// Mean of every null value across domains and permutations.
    pub grand_null_mean: f64,
    pub global_mean_distance: f64,
}

/// Label-permutation test for domain clustering in the embedding.
///
/// Every permutation shuffles the domain labels (keeping each domain's
/// size), then records the mean intra distance of each pseudo-domain.
/// Permutation `b` draws from its own seeded stream, so the result does not
/// depend on how trials are scheduled.
pub fn permutation_test(e: &PcaEmbedding, permutations: usize, seed: u64) -> Result<PermutationResult> {
    if permutations < 1 {
        return Err(Error::arg("at least one permutation is required"));
    }
    let domains = e.domains();
    if domains.len() < 2 {
        return Err(Error::arg("the permutation test needs at least two domains"));
    }
    let n = e.coords.len();
    let label_idx: Vec<usize> = e
        .labels
        .iter()
        .map(|l| domains.binary_search(l).expect("label present"))
        .collect();
    let sizes: Vec<usize> = (0..domains.len())
        .map(|d| label_idx.iter().filter(|&&x| x == d).count())
        .collect();
    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for k in i + 1..n {
            let d = euclidean(&e.coords[i], &e.coords[k]);
            dist[i * n + k] = d;
            dist[k * n + i] = d;
        }
    }
    let class_means = |labels: &[usize]| -> Vec<f64> {
        let mut sums = vec![0.0; domains.len()];
        for i in 0..n {
            let row = &dist[i * n..(i + 1) * n];
            let li = labels[i];
            for k in i + 1..n {
                if labels[k] == li {
                    sums[li] += row[k];
                }
            }
        }
        sums.iter()
            .zip(&sizes)
            .map(|(s, &u)| if u >= 2 { s / (u * (u - 1) / 2) as f64 } else { f64::NAN })
            .collect()
    };
    let observed = class_means(&label_idx);
    let null: Vec<Vec<f64>> = par::map_range(permutations, |b| {
        let mut rng = seed::rng(seed, &[b as u64]);
        let mut shuffled = label_idx.clone();
        shuffled.shuffle(&mut rng);
        class_means(&shuffled)
    });

    let mut out = Vec::new();
    let (mut grand, mut grand_n) = (0.0, 0usize);
    for (d, name) in domains.iter().enumerate() {
        if sizes[d] < 2 {
            continue;
        }
        let values: Vec<f64> = null.iter().map(|row| row[d]).collect();
        let null_mean = values.iter().sum::<f64>() / permutations as f64;
        grand += values.iter().sum::<f64>();
        grand_n += permutations;
        let at_most = values.iter().filter(|&&v| v <= observed[d]).count();
        out.push(DomainPermutation {
            domain: name.clone(),
            size: sizes[d],
            observed: observed[d],
            null: values,
            null_mean,
            p_value: (at_most + 1) as f64 / (permutations + 1) as f64,
        });
    }
    Ok(PermutationResult {
        permutations,
        domains: out,
        grand_null_mean: if grand_n > 0 { grand / grand_n as f64 } else { f64::NAN },
        global_mean_distance: global_mean_distance(e),
    })
}
