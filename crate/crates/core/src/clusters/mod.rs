//! Word clustering: Brown induction over raw text and k-means over
//! embedding tables, plus the attribute emission for both.

mod brown;
mod kmeans;

pub use brown::{brown_features, brown_induce, BrownModel, MergeRecord, UNK_PATH};
pub use kmeans::{
    cluster_features, kmeans_fit, kmeans_multi, smallest_k_cluster, KMeansFit, KMeansModel,
    NeighborClusters,
};

use alloc::vec::Vec;

/// Configuration for cluster-based feature emission.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterFeatureConfig {
    /// Brown path prefix lengths; empty means raw full paths only.
    pub brown_prefix_lengths: Vec<usize>,
    /// k-means granularities, strictly increasing.
    pub ks: Vec<usize>,
    pub compound: bool,
}

impl Default for ClusterFeatureConfig {
    fn default() -> Self {
        ClusterFeatureConfig {
            brown_prefix_lengths: Vec::new(),
            ks: alloc::vec![100, 200, 300, 400, 500, 1000],
            compound: true,
        }
    }
}

impl ClusterFeatureConfig {
    pub fn validate(&self) -> crate::error::Result<()> {
        if !self.ks.windows(2).all(|w| w[0] < w[1]) {
            return Err(crate::error::CoreError::InvalidArgument(
                "cluster granularities must be strictly increasing".into(),
            ));
        }
        Ok(())
    }
}
