//! Domain-aware evaluation of link prediction algorithms.
//!
//! The crate covers the whole evaluation loop over a labelled corpus of
//! networks: loading and canonicalizing edge lists ([`graph`]), corpus
//! manifests and result persistence ([`corpus`]), topology descriptors
//! ([`features`]), the train/validation/probe split with negative sampling
//! ([`split`]), classical predictors ([`predictors`]), ranking metrics
//! ([`metrics`]) and the per-domain ranking statistics ([`stats`]): Kendall
//! consistency matrices, Winner Scores, PCA fingerprints with a label
//! permutation test, and ranking stability curves. [`pipeline`] wires them
//! together into a resumable, deterministic run.
//!
//! Data-parallel loops go through [`par`], which uses rayon when the
//! `parallel` feature is enabled (the default) and plain iterators otherwise.

pub mod corpus;
pub mod error;
pub mod features;
pub mod graph;
pub mod metrics;
pub mod par;
pub mod pipeline;
pub mod predictors;
pub mod seed;
pub mod split;
pub mod stats;

pub use error::{Error, Result};
pub use graph::{Graph, Pair};
