//! Data streams, online base learners and ensemble combiners.

mod csv_source;
mod ensemble;
mod gaussian;
mod hoeffding;
mod learner;
mod naive_bayes;
mod rbf;
pub mod vote_dump;

use serde::{Deserialize, Serialize};

pub use csv_source::{CsvDataset, CsvSchema};
pub use ensemble::{Combiner, EnsembleConfig, EnsembleModel, Prediction, VoteMode};
pub use hoeffding::{HoeffdingConfig, HoeffdingTree};
pub use learner::{BaseLearner, LearnerKind};
pub use naive_bayes::NaiveBayes;
pub use rbf::{RbfGenerator, RbfStreamConfig};

/// One labelled example.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamInstance {
    pub features: Vec<f64>,
    pub label: usize,
}

/// A source of labelled instances with a fixed schema.
pub trait InstanceStream {
    fn n_classes(&self) -> usize;
    fn n_features(&self) -> usize;
    fn next_instance(&mut self) -> Option<StreamInstance>;
}

/// Replays a slice of instances.
#[derive(Debug, Clone)]
pub struct SliceStream<'a> {
    instances: &'a [StreamInstance],
    n_classes: usize,
    n_features: usize,
    pos: usize,
}

impl<'a> SliceStream<'a> {
    pub fn new(instances: &'a [StreamInstance], n_classes: usize, n_features: usize) -> Self {
        Self {
            instances,
            n_classes,
            n_features,
            pos: 0,
        }
    }
}

impl InstanceStream for SliceStream<'_> {
    fn n_classes(&self) -> usize {
        self.n_classes
    }

    fn n_features(&self) -> usize {
        self.n_features
    }

    fn next_instance(&mut self) -> Option<StreamInstance> {
        let inst = self.instances.get(self.pos)?.clone();
        self.pos += 1;
        Some(inst)
    }
}
