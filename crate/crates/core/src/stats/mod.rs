//! Per-domain ranking statistics over algorithm rank matrices.

mod consistency;
mod kendall;
mod pca;
mod permutation;
mod rank;
mod rsc;
mod winner;

pub use consistency::{
    consistency, consistency_matrix, inter_consistency, intra_consistency, ConsistencyMatrix,
};
pub use kendall::kendall_tau;
pub use pca::{fit_pca, pca_embed, PcaEmbedding, PcaModel};
pub use permutation::{
    global_mean_distance, intra_domain_distance, permutation_test, DomainPermutation,
    PermutationResult, DEFAULT_PERMUTATIONS,
};
pub use rank::{build_rank_matrix, RankMatrix};
pub use rsc::{rsc_curve, RscCurve, DEFAULT_RSC_THRESHOLD, DEFAULT_RSC_TRIALS};
pub use winner::{winner_scores, WinnerScoreTable};
