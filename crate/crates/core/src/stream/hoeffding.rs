//! Hoeffding tree for numeric attributes.
//!
//! Leaves keep class weights and, per feature and class, a Gaussian summary
//! of the values seen. Every `grace_period` weight a leaf scores candidate
//! binary splits by information gain and splits when the best candidate
//! beats the runner-up by more than the Hoeffding bound
//! `ε = sqrt(R² ln(1/δ) / 2n)`, or when `ε` falls below the tie threshold.

use serde::{Deserialize, Serialize};

use super::gaussian::GaussianEstimator;
use super::{BaseLearner, StreamInstance};
use crate::votes::VoteVector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoeffdingConfig {
    pub grace_period: f64,
    /// Split confidence δ.
    pub delta: f64,
    /// Tie threshold τ.
    pub tau: f64,
    /// Candidate thresholds per numeric feature.
    pub n_split_points: usize,
    /// Smallest fraction of weight each branch must receive.
    pub min_branch_fraction: f64,
}

impl Default for HoeffdingConfig {
    fn default() -> Self {
        Self {
            grace_period: 200.0,
            delta: 1e-7,
            tau: 0.05,
            n_split_points: 10,
            min_branch_fraction: 0.01,
        }
    }
}

#[derive(Debug, Clone)]
struct Leaf {
    class_weight: Vec<f64>,
    // [feature][class]
    observers: Vec<Vec<GaussianEstimator>>,
    weight_at_last_eval: f64,
}

impl Leaf {
    fn new(class_weight: Vec<f64>, n_features: usize) -> Self {
        let m = class_weight.len();
        let seen = class_weight.iter().sum();
        Self {
            class_weight,
            observers: vec![vec![GaussianEstimator::default(); m]; n_features],
            weight_at_last_eval: seen,
        }
    }

    fn total(&self) -> f64 {
        self.class_weight.iter().sum()
    }

    fn is_pure(&self) -> bool {
        self.class_weight.iter().filter(|&&w| w > 0.0).count() < 2
    }
}

#[derive(Debug, Clone)]
enum Node {
    Leaf(Leaf),
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    merit: f64,
    feature: usize,
    threshold: f64,
}

/// Incremental decision tree with Hoeffding-bound split decisions.
#[derive(Debug, Clone)]
pub struct HoeffdingTree {
    m: usize,
    n_features: usize,
    config: HoeffdingConfig,
    nodes: Vec<Node>,
}

fn entropy(dist: &[f64]) -> f64 {
    let total: f64 = dist.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    -dist
        .iter()
        .filter(|&&w| w > 0.0)
        .map(|&w| {
            let p = w / total;
            p * p.log2()
        })
        .sum::<f64>()
}

impl HoeffdingTree {
    pub fn new(m: usize, n_features: usize, config: HoeffdingConfig) -> Self {
        Self {
            m,
            n_features,
            config,
            nodes: vec![Node::Leaf(Leaf::new(vec![0.0; m], n_features))],
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf(_)))
            .count()
    }

    pub fn n_splits(&self) -> usize {
        self.nodes.len() - self.n_leaves()
    }

    fn leaf_index(&self, features: &[f64]) -> usize {
        let mut idx = 0;
        while let Node::Split {
            feature,
            threshold,
            left,
            right,
        } = self.nodes[idx]
        {
            idx = if features[feature] <= threshold {
                left
            } else {
                right
            };
        }
        idx
    }

    fn hoeffding_bound(&self, n: f64) -> f64 {
        let range = (self.m.max(2) as f64).log2();
        (range * range * (1.0 / self.config.delta).ln() / (2.0 * n)).sqrt()
    }

    /// Information gain of splitting on post-split class distributions, or
    /// `None` if a branch is too light.
    fn merit(&self, pre: &[f64], left: &[f64], right: &[f64]) -> Option<f64> {
        let total: f64 = pre.iter().sum();
        let lw: f64 = left.iter().sum();
        let rw: f64 = right.iter().sum();
        let min = self.config.min_branch_fraction * total;
        if lw < min || rw < min || lw + rw <= 0.0 {
            return None;
        }
        Some(entropy(pre) - (lw * entropy(left) + rw * entropy(right)) / (lw + rw))
    }

    fn split_dists(observers: &[GaussianEstimator], threshold: f64) -> (Vec<f64>, Vec<f64>) {
        let mut left = vec![0.0; observers.len()];
        let mut right = vec![0.0; observers.len()];
        for (c, est) in observers.iter().enumerate() {
            let w = est.weight();
            if w == 0.0 {
                continue;
            }
            let below = if threshold < est.min() {
                0.0
            } else if threshold >= est.max() {
                w
            } else {
                est.weight_below(threshold).clamp(0.0, w)
            };
            left[c] = below;
            right[c] = w - below;
        }
        (left, right)
    }

    fn best_for_feature(&self, leaf: &Leaf, feature: usize) -> Option<Candidate> {
        let observers = &leaf.observers[feature];
        let (lo, hi) = observers
            .iter()
            .filter(|e| e.weight() > 0.0)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), e| {
                (lo.min(e.min()), hi.max(e.max()))
            });
        if lo.partial_cmp(&hi) != Some(std::cmp::Ordering::Less) {
            return None;
        }
        let bins = self.config.n_split_points;
        let mut best: Option<Candidate> = None;
        for i in 0..bins {
            let threshold = lo + (hi - lo) * (i + 1) as f64 / (bins + 1) as f64;
            let (left, right) = Self::split_dists(observers, threshold);
            if let Some(merit) = self.merit(&leaf.class_weight, &left, &right) {
                if best.is_none_or(|b| merit > b.merit) {
                    best = Some(Candidate {
                        merit,
                        feature,
                        threshold,
                    });
                }
            }
        }
        best
    }

    fn attempt_split(&mut self, idx: usize) {
        let Node::Leaf(leaf) = &self.nodes[idx] else {
            return;
        };
        if leaf.is_pure() {
            return;
        }
        let mut candidates: Vec<Candidate> = (0..self.n_features)
            .filter_map(|f| self.best_for_feature(leaf, f))
            .collect();
        candidates.sort_by(|a, b| b.merit.total_cmp(&a.merit));
        let Some(best) = candidates.first().copied() else {
            return;
        };
        // Not splitting is always a candidate with merit 0.
        let second = candidates.get(1).map_or(0.0, |c| c.merit.max(0.0));
        let eps = self.hoeffding_bound(leaf.total());
        if best.merit <= 0.0 || !(best.merit - second > eps || eps < self.config.tau) {
            return;
        }

        let (left_dist, right_dist) =
            Self::split_dists(&leaf.observers[best.feature], best.threshold);
        let left = self.nodes.len();
        let right = left + 1;
        self.nodes
            .push(Node::Leaf(Leaf::new(left_dist, self.n_features)));
        self.nodes
            .push(Node::Leaf(Leaf::new(right_dist, self.n_features)));
        self.nodes[idx] = Node::Split {
            feature: best.feature,
            threshold: best.threshold,
            left,
            right,
        };
    }
}

impl BaseLearner for HoeffdingTree {
    fn partial_fit(&mut self, instance: &StreamInstance) {
        let idx = self.leaf_index(&instance.features);
        let grace = self.config.grace_period;
        let Node::Leaf(leaf) = &mut self.nodes[idx] else {
            unreachable!("leaf_index returns a leaf");
        };
        leaf.class_weight[instance.label] += 1.0;
        for (obs, &x) in leaf.observers.iter_mut().zip(&instance.features) {
            obs[instance.label].add(x, 1.0);
        }
        let seen = leaf.total();
        if seen - leaf.weight_at_last_eval >= grace {
            leaf.weight_at_last_eval = seen;
            self.attempt_split(idx);
        }
    }

    fn predict_scores(&self, features: &[f64]) -> VoteVector {
        match &self.nodes[self.leaf_index(features)] {
            Node::Leaf(leaf) => VoteVector::normalize_or_uniform(&leaf.class_weight),
            Node::Split { .. } => unreachable!("leaf_index returns a leaf"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn before_split_predicts_class_frequencies() {
        let mut ht = HoeffdingTree::new(3, 1, HoeffdingConfig::default());
        for (x, y) in [(0.1, 0), (0.2, 1), (0.3, 1), (0.4, 2)] {
            ht.partial_fit(&StreamInstance {
                features: vec![x],
                label: y,
            });
        }
        assert_eq!(ht.n_splits(), 0);
        assert_eq!(ht.predict_scores(&[5.0]).as_slice(), &[0.25, 0.5, 0.25]);
    }

    #[test]
    fn constant_label_never_splits() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut ht = HoeffdingTree::new(2, 3, HoeffdingConfig::default());
        for _ in 0..5000 {
            let features = (0..3).map(|_| rng.random::<f64>()).collect();
            ht.partial_fit(&StreamInstance { features, label: 1 });
        }
        assert_eq!(ht.n_splits(), 0);
        assert_eq!(ht.predict_scores(&[0.5, 0.5, 0.5]).argmax(), 1);
    }

    #[test]
    fn learns_a_threshold() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut ht = HoeffdingTree::new(2, 1, HoeffdingConfig::default());
        let mut correct = 0;
        let mut tested = 0;
        for i in 0..10_000 {
            let x: f64 = rng.random();
            let inst = StreamInstance {
                features: vec![x],
                label: usize::from(x > 0.37),
            };
            if i >= 5_000 {
                tested += 1;
                correct += usize::from(ht.predict_scores(&inst.features).argmax() == inst.label);
            }
            ht.partial_fit(&inst);
        }
        assert!(ht.n_splits() >= 1);
        assert!(correct as f64 / tested as f64 >= 0.9, "{correct}/{tested}");
    }

    #[test]
    fn votes_are_normalized() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut ht = HoeffdingTree::new(4, 2, HoeffdingConfig::default());
        for _ in 0..3000 {
            let f: Vec<f64> = (0..2).map(|_| rng.random()).collect();
            let label = ((f[0] * 4.0) as usize).min(3);
            ht.partial_fit(&StreamInstance { features: f, label });
            let v = ht.predict_scores(&[rng.random(), rng.random()]);
            assert!((v.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
        assert!(ht.n_splits() >= 1);
    }
}
