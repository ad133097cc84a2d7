use crate::error::{Error, Result};
use crate::graph::{Graph, Pair};

fn check_pairs(g: &Graph, pairs: &[Pair]) -> Result<()> {
    let n = g.node_count();
    match pairs.iter().find(|&&(i, j)| i >= n || j >= n) {
        Some(p) => Err(Error::arg(format!("query pair {p:?} out of range (n = {n})"))),
        None => Ok(()),
    }
}

/// Resource Allocation: sum of `1 / deg(z)` over common neighbours `z`.
pub fn ra_scores(g: &Graph, pairs: &[Pair]) -> Result<Vec<f64>> {
    check_pairs(g, pairs)?;
    Ok(pairs
        .iter()
        .map(|&(i, j)| {
            let (a, b) = (g.neighbors(i), g.neighbors(j));
            let (mut x, mut y) = (0, 0);
            let mut s = 0.0;
            while x < a.len() && y < b.len() {
                match a[x].cmp(&b[y]) {
                    std::cmp::Ordering::Less => x += 1,
                    std::cmp::Ordering::Greater => y += 1,
                    std::cmp::Ordering::Equal => {
                        s += 1.0 / g.deg(a[x]) as f64;
                        x += 1;
                        y += 1;
                    }
                }
            }
            s
        })
        .collect())
}

/// Degree-normalized length-3 paths: sum over `i-u-v-j` of
/// `1 / sqrt(deg(u) deg(v))`.
pub fn ra3_scores(g: &Graph, pairs: &[Pair]) -> Result<Vec<f64>> {
    check_pairs(g, pairs)?;
    let mut mark = vec![false; g.node_count()];
    Ok(pairs
        .iter()
        .map(|&(i, j)| {
            // walk from the lower-degree end
            let (i, j) = if g.deg(i) <= g.deg(j) { (i, j) } else { (j, i) };
            for &v in g.neighbors(j) {
                mark[v] = true;
            }
            let mut s = 0.0;
            for &u in g.neighbors(i) {
                let du = g.deg(u) as f64;
                for &v in g.neighbors(u) {
                    if mark[v] {
                        s += 1.0 / (du * g.deg(v) as f64).sqrt();
                    }
                }
            }
            for &v in g.neighbors(j) {
                mark[v] = false;
            }
            s
        })
        .collect())
}
