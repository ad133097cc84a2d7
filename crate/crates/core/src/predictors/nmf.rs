use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{Graph, Pair};
use crate::seed;

pub const NMF_DEFAULT_ITERATIONS: usize = 200;

const EPS: f64 = 1e-12;

/// Sparse nonnegative matrix kept in both row and column order.
#[derive(Debug, Clone)]
pub struct SparseNonNeg {
    rows: usize,
    cols: usize,
    by_row: Vec<Vec<(usize, f64)>>,
    by_col: Vec<Vec<(usize, f64)>>,
}

impl SparseNonNeg {
    pub fn from_triplets(rows: usize, cols: usize, entries: &[(usize, usize, f64)]) -> Result<Self> {
        let mut by_row = vec![Vec::new(); rows];
        let mut by_col = vec![Vec::new(); cols];
        for &(i, j, v) in entries {
            if i >= rows || j >= cols {
                return Err(Error::arg(format!("entry ({i}, {j}) outside {rows}x{cols}")));
            }
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::arg(format!("entry ({i}, {j}) = {v} is not nonnegative")));
            }
            if v > 0.0 {
                by_row[i].push((j, v));
                by_col[j].push((i, v));
            }
        }
        Ok(SparseNonNeg {
            rows,
            cols,
            by_row,
            by_col,
        })
    }

    pub fn adjacency(g: &Graph) -> Self {
        let by_row: Vec<Vec<(usize, f64)>> = (0..g.node_count())
            .map(|v| g.neighbors(v).iter().map(|&u| (u, 1.0)).collect())
            .collect();
        SparseNonNeg {
            rows: g.node_count(),
            cols: g.node_count(),
            by_col: by_row.clone(),
            by_row,
        }
    }

    fn squared_norm(&self) -> f64 {
        self.by_row.iter().flatten().map(|(_, v)| v * v).sum()
    }
}

/// Factors of `A ~ W H` and the squared Frobenius error after
/// initialization and after every iteration.
#[derive(Debug, Clone)]
pub struct NmfFit {
    pub rows: usize,
    pub cols: usize,
    pub dim: usize,
    /// `rows x dim`, row-major.
    pub w: Vec<f64>,
    /// `dim x cols`, row-major.
    pub h: Vec<f64>,
    pub errors: Vec<f64>,
}

impl NmfFit {
    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        let k = self.dim;
        (0..k).map(|c| self.w[i * k + c] * self.h[c * self.cols + j]).sum()
    }
}

/// `X X^T` for a row-major `rows x n` matrix.
fn gram_rows(x: &[f64], rows: usize, n: usize) -> Vec<f64> {
    let mut g = vec![0.0; rows * rows];
    for a in 0..rows {
        for b in a..rows {
            let s: f64 = x[a * n..(a + 1) * n].iter().zip(&x[b * n..(b + 1) * n]).map(|(p, q)| p * q).sum();
            g[a * rows + b] = s;
            g[b * rows + a] = s;
        }
    }
    g
}

/// `X^T X` for a row-major `n x k` matrix.
fn gram_cols(x: &[f64], n: usize, k: usize) -> Vec<f64> {
    let mut g = vec![0.0; k * k];
    for i in 0..n {
        let row = &x[i * k..(i + 1) * k];
        for a in 0..k {
            for b in a..k {
                g[a * k + b] += row[a] * row[b];
            }
        }
    }
    for a in 0..k {
        for b in 0..a {
            g[a * k + b] = g[b * k + a];
        }
    }
    g
}

/// `||A - WH||^2 = ||A||^2 - 2 <A, WH> + <W^T W, H H^T>`
fn frobenius_error(a: &SparseNonNeg, a_norm: f64, fit: &NmfFit) -> f64 {
    let cross: f64 = a
        .by_row
        .iter()
        .enumerate()
        .flat_map(|(i, row)| row.iter().map(move |&(j, v)| (i, j, v)))
        .map(|(i, j, v)| v * fit.entry(i, j))
        .sum();
    let wtw = gram_cols(&fit.w, fit.rows, fit.dim);
    let hht = gram_rows(&fit.h, fit.dim, fit.cols);
    let quad: f64 = wtw.iter().zip(&hht).map(|(x, y)| x * y).sum();
    (a_norm - 2.0 * cross + quad).max(0.0)
}

/// Lee-Seung multiplicative updates minimizing the squared Frobenius error.
pub fn factorize(a: &SparseNonNeg, dim: usize, iterations: usize, seed: u64) -> Result<NmfFit> {
    let (rows, cols) = (a.rows, a.cols);
    if dim == 0 || dim > rows.min(cols) {
        return Err(Error::arg(format!(
            "NMF dimension {dim} must be in 1..={}",
            rows.min(cols)
        )));
    }
    let k = dim;
    let a_norm = a.squared_norm();
    let mut rng = seed::rng(seed, &[0x4E4D46]);
    let mean = a.by_row.iter().flatten().map(|(_, v)| v).sum::<f64>() / (rows as f64 * cols as f64);
    let scale = (mean / k as f64).sqrt().max(1e-3);
    let mut fit = NmfFit {
        rows,
        cols,
        dim: k,
        w: (0..rows * k).map(|_| scale * (0.01 + rng.random::<f64>())).collect(),
        h: (0..k * cols).map(|_| scale * (0.01 + rng.random::<f64>())).collect(),
        errors: Vec::with_capacity(iterations + 1),
    };
    fit.errors.push(frobenius_error(a, a_norm, &fit));
    let mut num = vec![0.0; k];
    for _ in 0..iterations {
        // H <- H * (W^T A) / (W^T W H)
        let wtw = gram_cols(&fit.w, rows, k);
        for j in 0..cols {
            num.fill(0.0);
            for &(i, v) in &a.by_col[j] {
                for (c, x) in num.iter_mut().enumerate() {
                    *x += v * fit.w[i * k + c];
                }
            }
            let col: Vec<f64> = (0..k).map(|d| fit.h[d * cols + j]).collect();
            for c in 0..k {
                let den: f64 = (0..k).map(|d| wtw[c * k + d] * col[d]).sum();
                fit.h[c * cols + j] *= num[c] / (den + EPS);
            }
        }
        // W <- W * (A H^T) / (W H H^T)
        let hht = gram_rows(&fit.h, k, cols);
        for i in 0..rows {
            num.fill(0.0);
            for &(j, v) in &a.by_row[i] {
                for (c, x) in num.iter_mut().enumerate() {
                    *x += v * fit.h[c * cols + j];
                }
            }
            let row: Vec<f64> = fit.w[i * k..(i + 1) * k].to_vec();
            for c in 0..k {
                let den: f64 = (0..k).map(|d| row[d] * hht[d * k + c]).sum();
                fit.w[i * k + c] *= num[c] / (den + EPS);
            }
        }
        if fit.w.iter().chain(&fit.h).any(|v| !v.is_finite()) {
            return Err(Error::Numerical("NaN in NMF factors".to_string()));
        }
        fit.errors.push(frobenius_error(a, a_norm, &fit));
    }
    Ok(fit)
}

/// Scores `(W H)_ij` from a factorization of the training adjacency matrix.
pub fn nmf_scores(g: &Graph, pairs: &[Pair], dim: usize, iterations: usize, seed: u64) -> Result<Vec<f64>> {
    let n = g.node_count();
    if let Some(p) = pairs.iter().find(|&&(i, j)| i >= n || j >= n) {
        return Err(Error::arg(format!("query pair {p:?} out of range (n = {n})")));
    }
    let fit = factorize(&SparseNonNeg::adjacency(g), dim, iterations, seed)?;
    Ok(pairs.iter().map(|&(i, j)| fit.entry(i, j)).collect())
}
