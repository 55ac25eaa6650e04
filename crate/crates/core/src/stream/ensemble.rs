use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Poisson;
use serde::{Deserialize, Serialize};

use super::{BaseLearner, LearnerKind, StreamInstance};
use crate::error::{Error, Result};
use crate::linalg;
use crate::votes::{argmax, combine_votes, IdealVector, VoteMatrix, VoteVector, WeightVector};

/// How member votes are combined into a prediction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Combiner {
    /// Online bagging: each member casts one vote for its arg-max class.
    Majority,
    /// Least-squares weights fitted over a window of recent instances.
    Geometric,
}

impl Combiner {
    pub fn name(self) -> &'static str {
        match self {
            Combiner::Majority => "OzaBagging",
            Combiner::Geometric => "GOOWE",
        }
    }
}

/// Which vote representation is exposed for dependence estimation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum VoteMode {
    /// Members' normalized class scores.
    #[default]
    Scores,
    /// One-hot encoding of each member's arg-max class.
    OneHot,
}

impl VoteMode {
    pub fn apply(self, scores: &VoteMatrix) -> VoteMatrix {
        match self {
            VoteMode::Scores => scores.clone(),
            VoteMode::OneHot => {
                let m = scores.m();
                let mut out = VoteMatrix::with_capacity(m, scores.n_rows());
                for row in scores.rows() {
                    out.push(&VoteVector::one_hot(m, argmax(row)))
                        .expect("same width");
                }
                out
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub size: usize,
    pub combiner: Combiner,
    pub learner: LearnerKind,
    /// Poisson rate for online bagging.
    pub lambda: f64,
    /// Instances kept for geometric weight fitting.
    pub window: usize,
    /// Ridge added to the normal equations.
    pub ridge: f64,
    pub seed: u64,
}

impl EnsembleConfig {
    pub fn new(size: usize, combiner: Combiner, seed: u64) -> Self {
        Self {
            size,
            combiner,
            learner: LearnerKind::default(),
            lambda: 1.0,
            window: 100,
            ridge: 1e-8,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.size == 0 {
            return Err(Error::validation("ensemble size must be positive"));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::validation(
                "Poisson rate must be finite and non-negative",
            ));
        }
        if self.window == 0 {
            return Err(Error::validation("weight window must be positive"));
        }
        if self.ridge.is_nan() || self.ridge < 0.0 {
            return Err(Error::validation("ridge must be non-negative"));
        }
        Ok(())
    }
}

/// Member scores for one instance and the combined class.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub scores: VoteMatrix,
    pub class: usize,
}

/// A fixed-size ensemble of online learners.
pub struct EnsembleModel {
    m: usize,
    members: Vec<Box<dyn BaseLearner>>,
    combiner: Combiner,
    weights: WeightVector,
    window: VecDeque<(VoteMatrix, IdealVector)>,
    window_cap: usize,
    // running Σ_k ⟨S_i, S_j⟩ (upper triangle) and Σ_k S_i[class] over the window
    gram: Vec<f64>,
    target: Vec<f64>,
    ridge: f64,
    poisson: Option<Poisson<f64>>,
    rng: ChaCha8Rng,
    fits: Vec<u64>,
    singular_solves: u64,
}

impl EnsembleModel {
    pub fn new(config: &EnsembleConfig, m: usize, n_features: usize) -> Result<Self> {
        config.validate()?;
        if m < 2 {
            return Err(Error::validation("ensemble needs at least 2 classes"));
        }
        let poisson = if config.lambda > 0.0 {
            Some(Poisson::new(config.lambda).map_err(|e| Error::validation(e.to_string()))?)
        } else {
            None
        };
        Ok(Self {
            m,
            members: (0..config.size)
                .map(|_| config.learner.build(m, n_features))
                .collect(),
            combiner: config.combiner,
            weights: WeightVector::uniform(config.size),
            window: VecDeque::with_capacity(config.window),
            window_cap: config.window,
            gram: vec![0.0; config.size * config.size],
            target: vec![0.0; config.size],
            ridge: config.ridge,
            poisson,
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            fits: vec![0; config.size],
            singular_solves: 0,
        })
    }

    /// Builds an ensemble from caller-supplied members.
    pub fn from_members(
        members: Vec<Box<dyn BaseLearner>>,
        m: usize,
        combiner: Combiner,
        seed: u64,
    ) -> Result<Self> {
        let mut cfg = EnsembleConfig::new(members.len(), combiner, seed);
        cfg.learner = LearnerKind::NaiveBayes;
        let mut model = Self::new(&cfg, m, 0)?;
        model.members = members;
        Ok(model)
    }

    pub fn size(&self) -> usize {
        self.members.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn combiner(&self) -> Combiner {
        self.combiner
    }

    pub fn weights(&self) -> &WeightVector {
        &self.weights
    }

    pub fn window_len(&self) -> usize {
        self.window.len()
    }

    /// Number of `partial_fit` calls each member has received.
    pub fn fit_counts(&self) -> &[u64] {
        &self.fits
    }

    /// Weight solves that fell back to the previous weights.
    pub fn singular_solves(&self) -> u64 {
        self.singular_solves
    }

    pub fn member_scores(&self, features: &[f64]) -> VoteMatrix {
        let mut scores = VoteMatrix::with_capacity(self.m, self.members.len());
        for member in &self.members {
            scores
                .push(&member.predict_scores(features))
                .expect("members emit m-class votes");
        }
        scores
    }

    pub fn predict(&self, features: &[f64]) -> Prediction {
        let scores = self.member_scores(features);
        let class = match self.combiner {
            Combiner::Majority => {
                let mut tally = vec![0.0; self.m];
                for row in scores.rows() {
                    tally[argmax(row)] += 1.0;
                }
                argmax(&tally)
            }
            Combiner::Geometric => {
                combine_votes(&scores, &self.weights)
                    .expect("one weight per member")
                    .1
            }
        };
        Prediction { scores, class }
    }

    /// Online bagging step: each member trains `k ~ Poisson(λ)` times.
    pub fn oza_update(&mut self, instance: &StreamInstance) {
        for (member, fits) in self.members.iter_mut().zip(self.fits.iter_mut()) {
            let k = match &self.poisson {
                Some(dist) => self.rng.sample(dist) as u64,
                None => 0,
            };
            for _ in 0..k {
                member.partial_fit(instance);
            }
            *fits += k;
        }
    }

    fn accumulate(&mut self, scores: &VoteMatrix, ideal: &IdealVector, sign: f64) {
        let n = self.members.len();
        for i in 0..n {
            let si = scores.row(i);
            self.target[i] += sign * si[ideal.class()];
            for j in i..n {
                let dot: f64 = si.iter().zip(scores.row(j)).map(|(x, y)| x * y).sum();
                self.gram[i * n + j] += sign * dot;
            }
        }
    }

    /// Adds an instance's pre-training votes to the weight window.
    pub fn record(&mut self, scores: VoteMatrix, label: usize) -> Result<()> {
        let ideal = IdealVector::new(label, self.m)?;
        if scores.n_rows() != self.members.len() || scores.m() != self.m {
            return Err(Error::validation(
                "score matrix does not match the ensemble shape",
            ));
        }
        if self.window.len() == self.window_cap {
            if let Some((old, old_ideal)) = self.window.pop_front() {
                self.accumulate(&old, &old_ideal, -1.0);
            }
        }
        self.accumulate(&scores, &ideal, 1.0);
        self.window.push_back((scores, ideal));
        Ok(())
    }

    /// Refits weights minimizing `Σ_k ‖Σ_i W_i S_i − o‖²` over the window
    /// through the ridge-regularized normal equations. A singular system
    /// leaves the previous weights in place.
    pub fn goowe_update_weights(&mut self) -> &WeightVector {
        let n = self.members.len();
        if self.window.is_empty() {
            return &self.weights;
        }
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                a[i * n + j] = self.gram[i * n + j];
                a[j * n + i] = self.gram[i * n + j];
            }
            a[i * n + i] += self.ridge;
        }
        let d = self.target.clone();
        match linalg::solve_dense(a, d, 1e-13) {
            Some(w) => self.weights = WeightVector::new(w),
            None => {
                self.singular_solves += 1;
                log::warn!("geometric weight system is singular; keeping previous weights");
            }
        }
        &self.weights
    }

    /// Training step after the instance has been scored: geometric
    /// ensembles update their window and weights first, then every member
    /// trains by online bagging.
    pub fn learn(
        &mut self,
        instance: &StreamInstance,
        prediction: Option<&Prediction>,
    ) -> Result<()> {
        if self.combiner == Combiner::Geometric {
            let scores = match prediction {
                Some(p) => p.scores.clone(),
                None => self.member_scores(&instance.features),
            };
            self.record(scores, instance.label)?;
            self.goowe_update_weights();
        }
        self.oza_update(instance);
        Ok(())
    }
}
