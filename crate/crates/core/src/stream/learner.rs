use serde::{Deserialize, Serialize};

use super::{HoeffdingConfig, HoeffdingTree, NaiveBayes, StreamInstance};
use crate::votes::VoteVector;

/// An incrementally trained classifier that emits normalized votes.
pub trait BaseLearner: Send + Sync {
    fn partial_fit(&mut self, instance: &StreamInstance);

    /// Per-class scores for `features`, always summing to one.
    fn predict_scores(&self, features: &[f64]) -> VoteVector;
}

/// Which base learner an ensemble is built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LearnerKind {
    HoeffdingTree(HoeffdingConfig),
    NaiveBayes,
}

impl Default for LearnerKind {
    fn default() -> Self {
        LearnerKind::HoeffdingTree(HoeffdingConfig::default())
    }
}

impl LearnerKind {
    pub fn build(&self, m: usize, n_features: usize) -> Box<dyn BaseLearner> {
        match self {
            LearnerKind::HoeffdingTree(cfg) => {
                Box::new(HoeffdingTree::new(m, n_features, cfg.clone()))
            }
            LearnerKind::NaiveBayes => Box::new(NaiveBayes::new(m, n_features)),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            LearnerKind::HoeffdingTree(_) => "ht",
            LearnerKind::NaiveBayes => "nb",
        }
    }
}
