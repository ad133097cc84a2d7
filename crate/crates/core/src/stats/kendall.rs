use crate::error::{Error, Result};

/// Kendall's tau as `(N_c - N_d) / C(m, 2)`.
///
/// A pair `(j, k)` is concordant when `(a_j - a_k)(b_j - b_k) > 0` and
/// discordant when the product is negative. Pairs tied in either vector
/// count towards neither, but the denominator stays `C(m, 2)`, so ties pull
/// the coefficient towards zero while `tau(a, a) = 1` still holds for
/// tie-free `a`.
pub fn kendall_tau(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::arg(format!(
            "rank vectors differ in length: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let m = a.len();
    if m < 2 {
        return Err(Error::arg("kendall tau needs at least two items"));
    }
    let mut concordant = 0i64;
    let mut discordant = 0i64;
    for j in 0..m {
        for k in j + 1..m {
            let s = (a[j] - a[k]) * (b[j] - b[k]);
            if s > 0.0 {
                concordant += 1;
            } else if s < 0.0 {
                discordant += 1;
            }
        }
    }
    let pairs = (m * (m - 1) / 2) as f64;
    Ok((concordant - discordant) as f64 / pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        assert_eq!(kendall_tau(&[1., 2., 3.], &[1., 2., 3.]).unwrap(), 1.0);
        assert_eq!(kendall_tau(&[1., 2., 3.], &[3., 2., 1.]).unwrap(), -1.0);
        assert_eq!(kendall_tau(&[1., 2., 3.], &[1., 3., 2.]).unwrap(), 1.0 / 3.0);
    }

    #[test]
    fn errors() {
        assert!(kendall_tau(&[1., 2.], &[1.]).is_err());
        assert!(kendall_tau(&[1.], &[1.]).is_err());
    }

    #[test]
    fn ties_count_for_neither_side() {
        // only the (0,2) and (1,2) pairs are untied in a
        let t = kendall_tau(&[1., 1., 2.], &[1., 2., 3.]).unwrap();
        assert!((t - 2.0 / 3.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn symmetric_and_bounded(
            a in prop::collection::vec(0u8..6, 2..15),
            seed in any::<u64>(),
        ) {
            let a: Vec<f64> = a.into_iter().map(f64::from).collect();
            let b: Vec<f64> = a.iter().enumerate()
                .map(|(i, _)| ((seed >> (i % 60)) & 7) as f64)
                .collect();
            let t1 = kendall_tau(&a, &b).unwrap();
            let t2 = kendall_tau(&b, &a).unwrap();
            prop_assert_eq!(t1, t2);
            prop_assert!((-1.0..=1.0).contains(&t1));
        }
    }
}
