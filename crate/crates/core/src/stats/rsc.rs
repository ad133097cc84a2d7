use rand::seq::index;

use crate::error::{Error, Result};
use crate::{par, seed};

use super::kendall::kendall_tau;
use super::rank::RankMatrix;

pub const DEFAULT_RSC_TRIALS: usize = 100;
pub const DEFAULT_RSC_THRESHOLD: f64 = 0.9;

/// Ranking Stability Coefficient curve of one domain.
#[derive(Debug, Clone)]
pub struct RscCurve {
    pub domain: String,
    /// Mean rank of each algorithm over the whole domain.
    pub reference: Vec<f64>,
    pub trials: usize,
    /// `mean_tau[L - 1]` is the average tau for samples of `L` networks.
    pub mean_tau: Vec<f64>,
    pub threshold: f64,
}

impl RscCurve {
    /// Smallest sample size whose mean tau reaches the threshold.
    pub fn saturation_size(&self) -> Option<usize> {
        self.mean_tau.iter().position(|&t| t >= self.threshold).map(|i| i + 1)
    }

    pub fn points(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.mean_tau.iter().enumerate().map(|(i, &t)| (i + 1, t))
    }
}

/// Column sums of the selected rows, divided by the number of rows.
///
/// Ranks are small integers, so the sums are exact and the mean of the full
/// domain is bit-identical whatever order its rows are visited in.
fn mean_ranks(p: &RankMatrix, rows: impl Iterator<Item = usize>) -> Vec<f64> {
    let mut sums = vec![0u64; p.algorithm_count()];
    let mut count = 0u64;
    for i in rows {
        for (s, &r) in sums.iter_mut().zip(&p.rows()[i]) {
            *s += r as u64;
        }
        count += 1;
    }
    sums.into_iter().map(|s| s as f64 / count as f64).collect()
}

/// For each `L` in `1..=u_p`, averages `tau(r_L, r_p)` over `trials` random
/// samples of `L` networks drawn without replacement. Samples are drawn
/// independently for every `L`; trial `(L, i)` has its own seeded stream.
pub fn rsc_curve(p: &RankMatrix, trials: usize, seed: u64, threshold: f64) -> Result<RscCurve> {
    let u = p.len();
    if u < 2 {
        return Err(Error::arg(format!(
            "RSC of domain `{}` needs at least two networks",
            p.domain()
        )));
    }
    if trials < 1 {
        return Err(Error::arg("RSC needs at least one trial"));
    }
    if p.algorithm_count() < 2 {
        return Err(Error::arg("RSC needs at least two algorithms"));
    }
    let reference = mean_ranks(p, 0..u);
    let taus: Vec<f64> = par::map_range(u * trials, |job| {
        let size = job / trials + 1;
        let trial = job % trials;
        let mut rng = seed::rng(seed, &[size as u64, trial as u64]);
        let sample = index::sample(&mut rng, u, size);
        let r = mean_ranks(p, sample.into_iter());
        kendall_tau(&r, &reference).expect("equal lengths")
    });
    let mean_tau = taus
        .chunks(trials)
        .map(|c| c.iter().sum::<f64>() / trials as f64)
        .collect();
    Ok(RscCurve {
        domain: p.domain().to_string(),
        reference,
        trials,
        mean_tau,
        threshold,
    })
}
