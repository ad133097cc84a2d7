use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Principal axes of a set of rank fingerprints.
///
/// Components are the eigenvectors of the sample covariance (denominator
/// `u - 1`) of the raw ranks, ordered by decreasing eigenvalue. Each
/// component is oriented so that its largest-magnitude loading is positive.
#[derive(Debug, Clone)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// Row `c` is component `c` (unit length).
    pub components: Vec<Vec<f64>>,
    pub eigenvalues: Vec<f64>,
    /// Share of total variance per component. All zeros when the input has
    /// no variance at all.
    pub explained_variance_ratio: Vec<f64>,
}

impl PcaModel {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Coordinates of `row` on the first `k` components.
    pub fn transform(&self, row: &[f64], k: usize) -> Vec<f64> {
        self.components
            .iter()
            .take(k)
            .map(|c| c.iter().zip(row).zip(&self.mean).map(|((w, x), mu)| w * (x - mu)).sum())
            .collect()
    }

    /// Maps coordinates (on the leading components) back to input space.
    pub fn reconstruct(&self, coords: &[f64]) -> Vec<f64> {
        let mut out = self.mean.clone();
        for (c, &z) in self.components.iter().zip(coords) {
            for (o, w) in out.iter_mut().zip(c) {
                *o += z * w;
            }
        }
        out
    }
}

pub fn fit_pca(rows: &[Vec<f64>]) -> Result<PcaModel> {
    let u = rows.len();
    if u < 2 {
        return Err(Error::arg("PCA needs at least two observations"));
    }
    let d = rows[0].len();
    if d == 0 || rows.iter().any(|r| r.len() != d) {
        return Err(Error::arg("PCA rows must share a positive dimension"));
    }
    let mut mean = vec![0.0; d];
    for r in rows {
        for (m, x) in mean.iter_mut().zip(r) {
            *m += x;
        }
    }
    for m in &mut mean {
        *m /= u as f64;
    }
    let centered = DMatrix::from_fn(u, d, |i, j| rows[i][j] - mean[j]);
    let cov = (centered.transpose() * &centered) / (u as f64 - 1.0);
    let eig = SymmetricEigen::new(cov);

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut components = Vec::with_capacity(d);
    let mut eigenvalues = Vec::with_capacity(d);
    for &c in &order {
        let mut v: Vec<f64> = eig.eigenvectors.column(c).iter().copied().collect();
        let lead = v
            .iter()
            .copied()
            .enumerate()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()).then(b.0.cmp(&a.0)))
            .map(|(_, x)| x)
            .unwrap_or(0.0);
        if lead < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        components.push(v);
        // round-off can leave tiny negative eigenvalues
        eigenvalues.push(eig.eigenvalues[c].max(0.0));
    }
    let total: f64 = eigenvalues.iter().sum();
    let explained_variance_ratio = if total > 0.0 {
        eigenvalues.iter().map(|l| l / total).collect()
    } else {
        vec![0.0; d]
    };
    Ok(PcaModel {
        mean,
        components,
        eigenvalues,
        explained_variance_ratio,
    })
}

/// Fingerprints projected onto the leading principal components.
#[derive(Debug, Clone)]
pub struct PcaEmbedding {
    pub networks: Vec<String>,
    pub labels: Vec<String>,
    pub coords: Vec<Vec<f64>>,
    /// Ratios for every component, not only the retained ones.
    pub explained_variance_ratio: Vec<f64>,
}

impl PcaEmbedding {
    pub fn domains(&self) -> Vec<String> {
        let mut d = self.labels.clone();
        d.sort();
        d.dedup();
        d
    }

    pub fn retained_variance(&self) -> f64 {
        let k = self.coords.first().map_or(0, Vec::len);
        self.explained_variance_ratio.iter().take(k).sum()
    }
}

/// Projects each network's rank vector onto the first `k` components.
pub fn pca_embed(
    networks: &[String],
    labels: &[String],
    rows: &[Vec<f64>],
    k: usize,
) -> Result<PcaEmbedding> {
    if networks.len() != rows.len() || labels.len() != rows.len() {
        return Err(Error::arg("networks, labels and rows must align"));
    }
    if rows.len() < k + 1 {
        return Err(Error::arg(format!(
            "PCA with {k} components needs at least {} networks, got {}",
            k + 1,
            rows.len()
        )));
    }
    let model = fit_pca(rows)?;
    let k = k.min(model.dim());
    Ok(PcaEmbedding {
        networks: networks.to_vec(),
        labels: labels.to_vec(),
        coords: rows.iter().map(|r| model.transform(r, k)).collect(),
        explained_variance_ratio: model.explained_variance_ratio,
    })
}
