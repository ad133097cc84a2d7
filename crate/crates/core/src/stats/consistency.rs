use crate::error::{Error, Result};

use super::kendall::kendall_tau;
use super::rank::RankMatrix;

fn check_columns(p: &RankMatrix, q: &RankMatrix) -> Result<()> {
    if p.algorithms() != q.algorithms() {
        return Err(Error::arg(format!(
            "domains `{}` and `{}` rank different algorithm sets",
            p.domain(),
            q.domain()
        )));
    }
    Ok(())
}

/// Mean tau over all `u_p * u_q` cross-domain network pairs.
pub fn inter_consistency(p: &RankMatrix, q: &RankMatrix) -> Result<f64> {
    check_columns(p, q)?;
    if p.is_empty() || q.is_empty() {
        return Err(Error::Undefined("consistency of an empty domain".to_string()));
    }
    let qs: Vec<Vec<f64>> = (0..q.len()).map(|j| q.row_f64(j)).collect();
    let mut sum = 0.0;
    for i in 0..p.len() {
        let a = p.row_f64(i);
        for b in &qs {
            sum += kendall_tau(&a, b)?;
        }
    }
    Ok(sum / (p.len() * q.len()) as f64)
}

/// Mean tau over ordered pairs `i != j` inside one domain.
pub fn intra_consistency(p: &RankMatrix) -> Result<f64> {
    let u = p.len();
    if u < 2 {
        return Err(Error::Undefined(format!(
            "intra-domain consistency of `{}` needs at least two networks",
            p.domain()
        )));
    }
    let rows: Vec<Vec<f64>> = (0..u).map(|i| p.row_f64(i)).collect();
    let mut sum = 0.0;
    for i in 0..u {
        for j in i + 1..u {
            // tau is symmetric; each unordered pair stands for two ordered ones
            sum += 2.0 * kendall_tau(&rows[i], &rows[j])?;
        }
    }
    Ok(sum / (u * (u - 1)) as f64)
}

/// Intra-domain consistency when both matrices describe the same domain,
/// inter-domain otherwise.
pub fn consistency(p: &RankMatrix, q: &RankMatrix) -> Result<f64> {
    if p.domain() == q.domain() {
        intra_consistency(p)
    } else {
        inter_consistency(p, q)
    }
}

/// Symmetric domain-by-domain matrix; `None` marks undefined diagonal cells
/// (domains with a single network).
#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyMatrix {
    pub domains: Vec<String>,
    pub values: Vec<Vec<Option<f64>>>,
}

pub fn consistency_matrix(domains: &[RankMatrix]) -> Result<ConsistencyMatrix> {
    let d = domains.len();
    let mut values = vec![vec![None; d]; d];
    for p in 0..d {
        values[p][p] = intra_consistency(&domains[p]).ok();
        for q in p + 1..d {
            let r = inter_consistency(&domains[p], &domains[q])?;
            values[p][q] = Some(r);
            values[q][p] = Some(r);
        }
    }
    Ok(ConsistencyMatrix {
        domains: domains.iter().map(|m| m.domain().to_string()).collect(),
        values,
    })
}

impl ConsistencyMatrix {
    /// Mean over off-diagonal cells and mean over defined diagonal cells.
    pub fn summary(&self) -> (Option<f64>, Option<f64>) {
        let d = self.domains.len();
        let mean = |v: Vec<f64>| (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64);
        let inter = (0..d)
            .flat_map(|p| (p + 1..d).map(move |q| (p, q)))
            .filter_map(|(p, q)| self.values[p][q])
            .collect();
        let intra = (0..d).filter_map(|p| self.values[p][p]).collect();
        (mean(inter), mean(intra))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::seq::SliceRandom;

    fn matrix(domain: &str, rows: Vec<Vec<u32>>) -> RankMatrix {
        let m = rows[0].len();
        RankMatrix::from_ranks(
            domain,
            (0..rows.len()).map(|i| format!("{domain}{i}")).collect(),
            (0..m).map(|l| format!("alg{l}")).collect(),
            rows,
        )
        .unwrap()
    }

    fn random_rows(u: usize, m: usize, seed: u64) -> Vec<Vec<u32>> {
        let mut rng = crate::seed::rng(seed, &[]);
        (0..u)
            .map(|_| {
                let mut r: Vec<u32> = (1..=m as u32).collect();
                r.shuffle(&mut rng);
                r
            })
            .collect()
    }

    fn tau_oracle(a: &[u32], b: &[u32]) -> f64 {
        let m = a.len();
        let mut s = 0i32;
        for j in 0..m {
            for k in j + 1..m {
                let x = (a[j] as i32 - a[k] as i32) * (b[j] as i32 - b[k] as i32);
                s += x.signum();
            }
        }
        s as f64 / (m * (m - 1) / 2) as f64
    }

    #[test]
    fn identical_rows_are_fully_consistent() {
        let p = matrix("p", vec![vec![2, 1, 3]; 4]);
        assert_eq!(intra_consistency(&p).unwrap(), 1.0);
    }

    #[test]
    fn reversed_rows_are_anticonsistent() {
        let p = matrix("p", vec![vec![1, 2, 3, 4]; 3]);
        let q = matrix("q", vec![vec![4, 3, 2, 1]; 2]);
        assert_eq!(inter_consistency(&p, &q).unwrap(), -1.0);
        assert_eq!(consistency(&p, &q).unwrap(), -1.0);
    }

    #[test]
    fn matches_double_loop_oracle() {
        let p = matrix("p", random_rows(4, 3, 1));
        let q = matrix("q", random_rows(5, 3, 2));
        let mut inter = 0.0;
        for a in p.rows() {
            for b in q.rows() {
                inter += tau_oracle(a, b);
            }
        }
        inter /= 20.0;
        assert!((inter_consistency(&p, &q).unwrap() - inter).abs() < 1e-12);

        let mut intra = 0.0;
        for (i, a) in p.rows().iter().enumerate() {
            for (j, b) in p.rows().iter().enumerate() {
                if i != j {
                    intra += tau_oracle(a, b);
                }
            }
        }
        intra /= 12.0;
        assert!((intra_consistency(&p).unwrap() - intra).abs() < 1e-12);
    }

    #[test]
    fn single_network_domain_is_undefined() {
        let p = matrix("p", vec![vec![1, 2]]);
        assert!(matches!(intra_consistency(&p), Err(Error::Undefined(_))));
        let cm = consistency_matrix(&[p]).unwrap();
        assert_eq!(cm.values, vec![vec![None]]);
    }

    #[test]
    fn matrix_is_symmetric_and_bounded() {
        let mats: Vec<RankMatrix> = (0..4)
            .map(|d| matrix(&format!("d{d}"), random_rows(3 + d, 6, d as u64 + 10)))
            .collect();
        let cm = consistency_matrix(&mats).unwrap();
        for p in 0..4 {
            for q in 0..4 {
                let v = cm.values[p][q].unwrap();
                assert_eq!(Some(v), cm.values[q][p]);
                assert!((-1.0..=1.0).contains(&v));
            }
        }
    }

    #[test]
    fn mismatched_algorithms_rejected() {
        let p = matrix("p", vec![vec![1, 2]; 2]);
        let q = RankMatrix::from_ranks("q", vec!["x".into()], vec!["z0".into(), "z1".into()], vec![vec![1, 2]]).unwrap();
        assert!(inter_consistency(&p, &q).is_err());
    }
}
