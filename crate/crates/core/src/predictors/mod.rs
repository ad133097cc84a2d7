//! Link predictors: each maps a training graph and a list of query pairs
//! to one likelihood score per pair.

mod deepwalk;
mod external;
mod heuristics;
mod mfi;
mod nmf;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use deepwalk::{deepwalk_scores, train_deepwalk, DeepWalkModel, DeepWalkParams};
pub use external::{ingest_external_scores, read_external_scores, write_score_file};
pub use heuristics::{ra3_scores, ra_scores};
pub use mfi::{mfi_scores, mfi_scores_with, MfiSolver, MFI_ALPHA, MFI_DENSE_LIMIT};
pub use nmf::{factorize, nmf_scores, NmfFit, SparseNonNeg, NMF_DEFAULT_ITERATIONS};

use crate::error::{Error, Result};
use crate::graph::{Graph, Pair};

/// Scores for a list of canonical pairs, tagged with who produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable {
    pub predictor: String,
    /// Snapshot of the configuration that produced the scores.
    pub config: String,
    pub pairs: Vec<Pair>,
    pub scores: Vec<f64>,
}

impl ScoreTable {
    pub fn new(predictor: impl Into<String>, config: impl Into<String>, pairs: Vec<Pair>, scores: Vec<f64>) -> Result<Self> {
        if pairs.len() != scores.len() {
            return Err(Error::arg(format!("{} pairs but {} scores", pairs.len(), scores.len())));
        }
        if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
            return Err(Error::Numerical(format!(
                "non-finite score for pair {:?}",
                pairs[i]
            )));
        }
        Ok(ScoreTable {
            predictor: predictor.into(),
            config: config.into(),
            pairs,
            scores,
        })
    }
}

/// Hyperparameters of the native predictors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Hyperparams {
    None,
    Mfi { alpha: f64 },
    Nmf { dim: usize, iterations: usize },
    DeepWalk(DeepWalkParams),
}

impl fmt::Display for Hyperparams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Hyperparams::None => write!(f, "-"),
            Hyperparams::Mfi { alpha } => write!(f, "alpha={alpha}"),
            Hyperparams::Nmf { dim, iterations } => write!(f, "dim={dim};iterations={iterations}"),
            Hyperparams::DeepWalk(p) => write!(
                f,
                "walk_length={};walks_per_node={};dim={};window={};negatives={};learning_rate={}",
                p.walk_length, p.walks_per_node, p.dim, p.window, p.negatives, p.learning_rate
            ),
        }
    }
}

/// Algorithm id, hyperparameters and training seed.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictorConfig {
    pub algorithm: NativeAlgorithm,
    pub params: Hyperparams,
    pub seed: u64,
}

impl PredictorConfig {
    pub fn snapshot(&self) -> String {
        format!("{}[{}];seed={}", self.algorithm.id(), self.params, self.seed)
    }

    /// Whether every hyperparameter lies in the published search grid.
    pub fn in_declared_grid(&self) -> bool {
        let grid = self.algorithm.grid(GridProfile::Full);
        grid.contains(&self.params)
    }
}

/// How much of the published hyperparameter grid to traverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GridProfile {
    /// Every combination listed for the algorithm.
    #[default]
    Full,
    /// The smallest value of every hyperparameter; a single configuration.
    Reduced,
}

impl std::str::FromStr for GridProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "full" => Ok(GridProfile::Full),
            "reduced" => Ok(GridProfile::Reduced),
            other => Err(Error::arg(format!("unknown grid profile `{other}`"))),
        }
    }
}

const EMBEDDING_DIMS: [usize; 3] = [32, 64, 128];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NativeAlgorithm {
    Ra,
    Ra3,
    Mfi,
    Nmf,
    DeepWalk,
}

impl NativeAlgorithm {
    pub const ALL: [NativeAlgorithm; 5] = [
        NativeAlgorithm::DeepWalk,
        NativeAlgorithm::Mfi,
        NativeAlgorithm::Nmf,
        NativeAlgorithm::Ra,
        NativeAlgorithm::Ra3,
    ];

    pub fn id(self) -> &'static str {
        match self {
            NativeAlgorithm::Ra => "RA",
            NativeAlgorithm::Ra3 => "RA3",
            NativeAlgorithm::Mfi => "MFI",
            NativeAlgorithm::Nmf => "NMF",
            NativeAlgorithm::DeepWalk => "DW",
        }
    }

    pub fn from_id(id: &str) -> Option<Self> {
        match id.to_ascii_uppercase().as_str() {
            "RA" => Some(NativeAlgorithm::Ra),
            "RA3" => Some(NativeAlgorithm::Ra3),
            "MFI" => Some(NativeAlgorithm::Mfi),
            "NMF" => Some(NativeAlgorithm::Nmf),
            "DW" | "DEEPWALK" => Some(NativeAlgorithm::DeepWalk),
            _ => None,
        }
    }

    /// Whether the algorithm has hyperparameters chosen on the validation set.
    pub fn is_parameterized(self) -> bool {
        self.grid(GridProfile::Full).len() > 1
    }

    pub fn grid(self, profile: GridProfile) -> Vec<Hyperparams> {
        match self {
            NativeAlgorithm::Ra | NativeAlgorithm::Ra3 => vec![Hyperparams::None],
            NativeAlgorithm::Mfi => vec![Hyperparams::Mfi { alpha: MFI_ALPHA }],
            NativeAlgorithm::Nmf => {
                let dims: &[usize] = match profile {
                    GridProfile::Full => &EMBEDDING_DIMS,
                    GridProfile::Reduced => &EMBEDDING_DIMS[..1],
                };
                dims.iter()
                    .map(|&dim| Hyperparams::Nmf {
                        dim,
                        iterations: NMF_DEFAULT_ITERATIONS,
                    })
                    .collect()
            }
            NativeAlgorithm::DeepWalk => {
                let (lengths, walks, dims, windows): (&[usize], &[usize], &[usize], &[usize]) = match profile {
                    GridProfile::Full => (&[40, 80], &[10, 80], &EMBEDDING_DIMS, &[5, 10]),
                    GridProfile::Reduced => (&[40], &[10], &[32], &[5]),
                };
                let mut grid = Vec::new();
                for &walk_length in lengths {
                    for &walks_per_node in walks {
                        for &dim in dims {
                            for &window in windows {
                                grid.push(Hyperparams::DeepWalk(DeepWalkParams {
                                    walk_length,
                                    walks_per_node,
                                    dim,
                                    window,
                                    ..DeepWalkParams::default()
                                }));
                            }
                        }
                    }
                }
                grid
            }
        }
    }

    /// Trains on `train` and scores `pairs`.
    pub fn score(self, train: &Graph, params: &Hyperparams, pairs: &[Pair], seed: u64) -> Result<ScoreTable> {
        let config = PredictorConfig {
            algorithm: self,
            params: params.clone(),
            seed,
        };
        let scores = match (self, params) {
            (NativeAlgorithm::Ra, Hyperparams::None) => ra_scores(train, pairs)?,
            (NativeAlgorithm::Ra3, Hyperparams::None) => ra3_scores(train, pairs)?,
            (NativeAlgorithm::Mfi, Hyperparams::Mfi { alpha }) => mfi_scores(train, pairs, *alpha)?,
            (NativeAlgorithm::Nmf, Hyperparams::Nmf { dim, iterations }) => {
                nmf_scores(train, pairs, *dim, *iterations, seed)?
            }
            (NativeAlgorithm::DeepWalk, Hyperparams::DeepWalk(p)) => deepwalk_scores(train, pairs, p, seed)?,
            (alg, p) => {
                return Err(Error::arg(format!("hyperparameters {p} do not belong to {}", alg.id())))
            }
        };
        ScoreTable::new(self.id(), config.snapshot(), pairs.to_vec(), scores)
    }
}

impl fmt::Display for NativeAlgorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}
