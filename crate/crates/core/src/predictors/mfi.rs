use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::{Graph, Pair};

pub const MFI_ALPHA: f64 = 0.1;
/// Node count up to which the full inverse is formed.
pub const MFI_DENSE_LIMIT: usize = 2000;

const CG_TOLERANCE: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MfiSolver {
    /// Dense inverse up to `MFI_DENSE_LIMIT` nodes, conjugate gradient above.
    #[default]
    Auto,
    Dense,
    ConjugateGradient,
}

/// Matrix Forest Index: entries of `(I + alpha L)^{-1}` with `L` the
/// combinatorial Laplacian.
pub fn mfi_scores(g: &Graph, pairs: &[Pair], alpha: f64) -> Result<Vec<f64>> {
    mfi_scores_with(g, pairs, alpha, MfiSolver::Auto)
}

pub fn mfi_scores_with(g: &Graph, pairs: &[Pair], alpha: f64, solver: MfiSolver) -> Result<Vec<f64>> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::arg(format!("MFI alpha must be positive, got {alpha}")));
    }
    let n = g.node_count();
    if n == 0 {
        return Err(Error::arg("MFI on an empty graph"));
    }
    if let Some(p) = pairs.iter().find(|&&(i, j)| i >= n || j >= n) {
        return Err(Error::arg(format!("query pair {p:?} out of range (n = {n})")));
    }
    let dense = match solver {
        MfiSolver::Auto => n <= MFI_DENSE_LIMIT,
        MfiSolver::Dense => true,
        MfiSolver::ConjugateGradient => false,
    };
    if dense {
        dense_scores(g, pairs, alpha)
    } else {
        cg_scores(g, pairs, alpha)
    }
}

fn dense_scores(g: &Graph, pairs: &[Pair], alpha: f64) -> Result<Vec<f64>> {
    let n = g.node_count();
    let mut m = DMatrix::<f64>::identity(n, n);
    for v in 0..n {
        m[(v, v)] += alpha * g.deg(v) as f64;
        for &u in g.neighbors(v) {
            m[(v, u)] -= alpha;
        }
    }
    let chol = m
        .cholesky()
        .ok_or_else(|| Error::Numerical("I + alpha L is not positive definite".to_string()))?;
    let inv = chol.inverse();
    Ok(pairs.iter().map(|&(i, j)| inv[(i, j)]).collect())
}

/// `(I + alpha L) x`
fn apply(g: &Graph, alpha: f64, x: &[f64], out: &mut [f64]) {
    for v in 0..g.node_count() {
        let nb = g.neighbors(v);
        let s: f64 = nb.iter().map(|&u| x[u]).sum();
        out[v] = x[v] + alpha * (nb.len() as f64 * x[v] - s);
    }
}

/// Solves `(I + alpha L) x = e_col` by conjugate gradient.
fn cg_column(g: &Graph, alpha: f64, col: usize) -> Result<Vec<f64>> {
    let n = g.node_count();
    let mut x = vec![0.0; n];
    let mut r = vec![0.0; n];
    r[col] = 1.0;
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let mut rr: f64 = 1.0;
    // the spectrum lies in [1, 1 + 2 alpha dmax], so this bound is generous
    let max_iter = 10 * n + 100;
    for _ in 0..max_iter {
        if rr.sqrt() <= CG_TOLERANCE {
            return Ok(x);
        }
        apply(g, alpha, &p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if pap <= 0.0 || !pap.is_finite() {
            return Err(Error::Numerical("conjugate gradient breakdown".to_string()));
        }
        let step = rr / pap;
        for k in 0..n {
            x[k] += step * p[k];
            r[k] -= step * ap[k];
        }
        let rr_next: f64 = r.iter().map(|v| v * v).sum();
        let beta = rr_next / rr;
        for k in 0..n {
            p[k] = r[k] + beta * p[k];
        }
        rr = rr_next;
    }
    Err(Error::Numerical(format!(
        "conjugate gradient did not converge for column {col}"
    )))
}

fn cg_scores(g: &Graph, pairs: &[Pair], alpha: f64) -> Result<Vec<f64>> {
    let mut by_col: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (k, &(_, j)) in pairs.iter().enumerate() {
        by_col.entry(j).or_default().push(k);
    }
    let mut out = vec![0.0; pairs.len()];
    for (col, idx) in by_col {
        let x = cg_column(g, alpha, col)?;
        for k in idx {
            out[k] = x[pairs[k].0];
        }
    }
    Ok(out)
}
