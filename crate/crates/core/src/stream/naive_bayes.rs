use super::gaussian::GaussianEstimator;
use super::{BaseLearner, StreamInstance};
use crate::votes::VoteVector;

const VARIANCE_FLOOR: f64 = 1e-9;

/// Gaussian naive Bayes with per-class running moments.
#[derive(Debug, Clone)]
pub struct NaiveBayes {
    class_weight: Vec<f64>,
    // [class][feature]
    stats: Vec<Vec<GaussianEstimator>>,
}

impl NaiveBayes {
    pub fn new(m: usize, n_features: usize) -> Self {
        Self {
            class_weight: vec![0.0; m],
            stats: vec![vec![GaussianEstimator::default(); n_features]; m],
        }
    }
}

impl BaseLearner for NaiveBayes {
    fn partial_fit(&mut self, instance: &StreamInstance) {
        self.class_weight[instance.label] += 1.0;
        for (est, &x) in self.stats[instance.label]
            .iter_mut()
            .zip(&instance.features)
        {
            est.add(x, 1.0);
        }
    }

    fn predict_scores(&self, features: &[f64]) -> VoteVector {
        let m = self.class_weight.len();
        let total: f64 = self.class_weight.iter().sum();
        if total == 0.0 {
            return VoteVector::uniform(m);
        }
        let log_post: Vec<f64> = (0..m)
            .map(|c| {
                if self.class_weight[c] == 0.0 {
                    return f64::NEG_INFINITY;
                }
                let prior = (self.class_weight[c] / total).ln();
                prior
                    + self.stats[c]
                        .iter()
                        .zip(features)
                        .map(|(est, &x)| est.log_density(x, VARIANCE_FLOOR))
                        .sum::<f64>()
            })
            .collect();
        let top = log_post.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let scores: Vec<f64> = log_post.iter().map(|&lp| (lp - top).exp()).collect();
        VoteVector::normalize_or_uniform(&scores)
    }
}
