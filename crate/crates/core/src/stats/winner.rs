use super::rank::RankMatrix;

/// Winner Scores of one domain: mean reciprocal rank per algorithm (`raw`)
/// and the same values normalized to sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct WinnerScoreTable {
    pub domain: String,
    pub algorithms: Vec<String>,
    pub raw: Vec<f64>,
    pub normalized: Vec<f64>,
}

impl WinnerScoreTable {
    /// Index of the highest normalized score; ties go to the earlier algorithm.
    pub fn winner(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (l, &v) in self.normalized.iter().enumerate() {
            if best.is_none_or(|b| v > self.normalized[b]) {
                best = Some(l);
            }
        }
        best
    }
}

pub fn winner_scores(p: &RankMatrix) -> WinnerScoreTable {
    let m = p.algorithm_count();
    let u = p.len();
    let mut raw = vec![0.0; m];
    if u > 0 {
        for row in p.rows() {
            for (l, &r) in row.iter().enumerate() {
                raw[l] += 1.0 / r as f64;
            }
        }
        for w in &mut raw {
            *w /= u as f64;
        }
    }
    let total: f64 = raw.iter().sum();
    let normalized = if total > 0.0 {
        raw.iter().map(|w| w / total).collect()
    } else {
        vec![0.0; m]
    };
    WinnerScoreTable {
        domain: p.domain().to_string(),
        algorithms: p.algorithms().to_vec(),
        raw,
        normalized,
    }
}
