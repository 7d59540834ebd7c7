//! First-order linear-chain CRF: feature extraction, maximum-likelihood
//! training with L-BFGS, and Viterbi decoding.

mod features;
mod model;
mod train;

pub use features::{extract_features, FeatureResources, FeatureTemplateSet};
pub use model::{
    log_likelihood_and_gradient, log_partition, sequence_score, viterbi, AttributedSentence,
    AttributedToken, CrfModel,
};
pub use train::{train, TrainOutcome};

/// Trainer settings, CRFsuite-comparable defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingConfig {
    /// Variance of the Gaussian prior (l2 strength is `1 / (2 sigma^2)`).
    pub l2_sigma2: f64,
    pub max_iterations: usize,
    pub convergence_tol: f64,
    pub lbfgs_memory: usize,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            l2_sigma2: 1.0,
            max_iterations: 300,
            convergence_tol: 1e-5,
            lbfgs_memory: 6,
        }
    }
}
