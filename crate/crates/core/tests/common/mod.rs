//! Brute-force reference implementations shared by the integration tests.
#![allow(dead_code)]

use lpdomain::Graph;
use rand::Rng;

pub fn adjacency(g: &Graph) -> Vec<Vec<bool>> {
    let n = g.node_count();
    let mut a = vec![vec![false; n]; n];
    for (i, j) in g.edges() {
        a[i][j] = true;
        a[j][i] = true;
    }
    a
}

pub fn random_graph<R: Rng>(n: usize, p: f64, rng: &mut R) -> Graph {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    Graph::from_edges(n, edges).unwrap()
}

/// Sum over every `z` adjacent to both ends of `1 / deg(z)`, `z` ascending.
pub fn ra_oracle(a: &[Vec<bool>], i: usize, j: usize) -> f64 {
    let deg = |v: usize| a[v].iter().filter(|&&x| x).count() as f64;
    let mut s = 0.0;
    for z in 0..a.len() {
        if a[i][z] && a[j][z] {
            s += 1.0 / deg(z);
        }
    }
    s
}

/// Sum over every walk `i-u-v-j` of `1 / sqrt(deg(u) deg(v))`.
pub fn ra3_oracle(a: &[Vec<bool>], i: usize, j: usize) -> f64 {
    let n = a.len();
    let deg: Vec<f64> = (0..n).map(|v| a[v].iter().filter(|&&x| x).count() as f64).collect();
    let mut s = 0.0;
    for u in 0..n {
        for v in 0..n {
            if a[i][u] && a[u][v] && a[v][j] {
                s += 1.0 / (deg[u] * deg[v]).sqrt();
            }
        }
    }
    s
}

/// Inverse by Gauss-Jordan elimination with partial pivoting.
pub fn invert(m: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
            .unwrap();
        a.swap(col, piv);
        let d = a[col][col];
        for x in a[col].iter_mut() {
            *x /= d;
        }
        for r in 0..n {
            if r != col {
                let f = a[r][col];
                if f != 0.0 {
                    let pivot_row = a[col].clone();
                    for (x, p) in a[r].iter_mut().zip(pivot_row) {
                        *x -= f * p;
                    }
                }
            }
        }
    }
    a.into_iter().map(|r| r[n..].to_vec()).collect()
}

/// `(I + alpha L)^{-1}` with `L` the combinatorial Laplacian.
pub fn mfi_oracle(a: &[Vec<bool>], alpha: f64) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut m = vec![vec![0.0; n]; n];
    for i in 0..n {
        let deg = a[i].iter().filter(|&&x| x).count() as f64;
        m[i][i] = 1.0 + alpha * deg;
        for j in 0..n {
            if a[i][j] {
                m[i][j] = -alpha;
            }
        }
    }
    invert(&m)
}

/// Probability that a positive outscores a negative, ties counting half,
/// by comparing every pair.
pub fn auc_oracle(pos: &[f64], neg: &[f64]) -> f64 {
    let mut s = 0.0;
    for &p in pos {
        for &q in neg {
            if p > q {
                s += 1.0;
            } else if p == q {
                s += 0.5;
            }
        }
    }
    s / (pos.len() * neg.len()) as f64
}

pub fn kendall_oracle(a: &[f64], b: &[f64]) -> f64 {
    let m = a.len();
    let (mut c, mut d) = (0i64, 0i64);
    for i in 0..m {
        for j in i + 1..m {
            let s = (a[i] - a[j]) * (b[i] - b[j]);
            if s > 0.0 {
                c += 1;
            } else if s < 0.0 {
                d += 1;
            }
        }
    }
    (c - d) as f64 / (m * (m - 1) / 2) as f64
}

/// Average ranks (1-based) with ties sharing the mean position.
pub fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut r = vec![0.0; x.len()];
    let mut k = 0;
    while k < idx.len() {
        let mut e = k;
        while e + 1 < idx.len() && x[idx[e + 1]] == x[idx[k]] {
            e += 1;
        }
        let avg = (k + e) as f64 / 2.0 + 1.0;
        for &i in &idx[k..=e] {
            r[i] = avg;
        }
        k = e + 1;
    }
    r
}

pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    sab / (saa * sbb).sqrt()
}

pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    pearson(&average_ranks(a), &average_ranks(b))
}

/// One-sample Kolmogorov-Smirnov statistic against Uniform(0, 1).
pub fn ks_uniform(samples: &[f64]) -> f64 {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in s.iter().enumerate() {
        let x = x.clamp(0.0, 1.0);
        d = d.max((i as f64 + 1.0) / n - x).max(x - i as f64 / n);
    }
    d
}

pub fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Mean distance over ordered pairs `i != k` of the given points.
pub fn mean_pairwise(points: &[&Vec<f64>]) -> f64 {
    let mut s = 0.0;
    let mut c = 0usize;
    for i in 0..points.len() {
        for k in 0..points.len() {
            if i != k {
                s += euclid(points[i], points[k]);
                c += 1;
            }
        }
    }
    s / c as f64
}

/// Returns `(distance, hop count)` matrix by Floyd-Warshall; `None` when
/// unreachable.
pub fn floyd_warshall(a: &[Vec<bool>]) -> Vec<Vec<Option<u32>>> {
    let n = a.len();
    let mut d: Vec<Vec<Option<u32>>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        Some(0)
                    } else if a[i][j] {
                        Some(1)
                    } else {
                        None
                    }
                })
                .collect()
        })
        .collect();
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if let (Some(x), Some(y)) = (d[i][k], d[k][j]) {
                    if d[i][j].is_none_or(|z| x + y < z) {
                        d[i][j] = Some(x + y);
                    }
                }
            }
        }
    }
    d
}

/// Compares every CSV in two directory trees byte by byte; returns the
/// relative paths compared.
pub fn assert_same_csvs(a: &std::path::Path, b: &std::path::Path) -> Vec<String> {
    let mut names = Vec::new();
    collect_csvs(a, a, &mut names);
    names.sort();
    let mut other = Vec::new();
    collect_csvs(b, b, &mut other);
    other.sort();
    assert_eq!(names, other, "different CSV sets");
    for n in &names {
        let x = std::fs::read(a.join(n)).unwrap();
        let y = std::fs::read(b.join(n)).unwrap();
        assert!(x == y, "{n} differs");
    }
    names
}

fn collect_csvs(root: &std::path::Path, dir: &std::path::Path, out: &mut Vec<String>) {
    for entry in std::fs::read_dir(dir).unwrap() {
        let p = entry.unwrap().path();
        if p.is_dir() {
            if p.file_name().is_some_and(|n| n == "cache") {
                continue;
            }
            collect_csvs(root, &p, out);
        } else if p.extension().is_some_and(|e| e == "csv") {
            out.push(p.strip_prefix(root).unwrap().to_string_lossy().into_owned());
        }
    }
}
