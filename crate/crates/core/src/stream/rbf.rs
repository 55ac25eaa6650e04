use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{InstanceStream, StreamInstance};
use crate::error::{Error, Result};

/// Parameters of the radial-basis-function stream generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RbfStreamConfig {
    pub m: usize,
    pub n_features: usize,
    pub n_centroids: usize,
    pub seed: u64,
    pub instance_count: u64,
    /// Scale applied to each centroid's spread, which is drawn from `U[0, 1)`.
    pub offset_std: f64,
}

impl RbfStreamConfig {
    pub fn new(m: usize, seed: u64, instance_count: u64) -> Self {
        Self {
            m,
            n_features: 20,
            n_centroids: 50,
            seed,
            instance_count,
            offset_std: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 2 {
            return Err(Error::validation("RBF stream needs at least 2 classes"));
        }
        if self.n_features == 0 || self.n_centroids == 0 || self.instance_count == 0 {
            return Err(Error::validation(
                "RBF feature, centroid and instance counts must be positive",
            ));
        }
        if self.n_centroids < self.m {
            return Err(Error::validation(format!(
                "{} centroids cannot cover {} classes",
                self.n_centroids, self.m
            )));
        }
        if !(self.offset_std >= 0.0 && self.offset_std.is_finite()) {
            return Err(Error::validation(
                "offset_std must be finite and non-negative",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct Centroid {
    center: Vec<f64>,
    label: usize,
    spread: f64,
    weight: f64,
}

/// Draws points around randomly placed centroids.
///
/// Each centroid has a uniform random center, spread and selection weight.
/// Classes are assigned round-robin so that every class owns a centroid.
#[derive(Debug, Clone)]
pub struct RbfGenerator {
    config: RbfStreamConfig,
    centroids: Vec<Centroid>,
    picker: WeightedIndex<f64>,
    rng: ChaCha8Rng,
    emitted: u64,
}

impl RbfGenerator {
    pub fn new(config: RbfStreamConfig) -> Result<Self> {
        config.validate()?;
        let mut model_rng = ChaCha8Rng::seed_from_u64(config.seed);
        let centroids = (0..config.n_centroids)
            .map(|i| Centroid {
                center: (0..config.n_features)
                    .map(|_| model_rng.random::<f64>())
                    .collect(),
                label: i % config.m,
                spread: model_rng.random::<f64>(),
                weight: model_rng.random::<f64>(),
            })
            .collect::<Vec<_>>();
        let picker = WeightedIndex::new(centroids.iter().map(|c| c.weight.max(f64::MIN_POSITIVE)))
            .map_err(|e| Error::Numerical(format!("centroid weights: {e}")))?;
        let rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x5DEE_CE66_D1CE_4E5B);
        Ok(Self {
            config,
            centroids,
            picker,
            rng,
            emitted: 0,
        })
    }

    pub fn config(&self) -> &RbfStreamConfig {
        &self.config
    }

    /// Probability of each class under the centroid selection weights.
    pub fn class_priors(&self) -> Vec<f64> {
        let total: f64 = self.centroids.iter().map(|c| c.weight).sum();
        let mut priors = vec![0.0; self.config.m];
        for c in &self.centroids {
            priors[c.label] += c.weight / total;
        }
        priors
    }

    fn draw(&mut self) -> StreamInstance {
        let idx = self.picker.sample(&mut self.rng);
        let d = self.config.n_features;
        let mut direction: Vec<f64> = (0..d).map(|_| self.rng.random_range(-1.0..1.0)).collect();
        let norm = direction.iter().map(|v| v * v).sum::<f64>().sqrt();
        let centroid = &self.centroids[idx];
        let radius: f64 =
            self.rng.sample::<f64, _>(StandardNormal) * centroid.spread * self.config.offset_std;
        let scale = if norm > 0.0 { radius / norm } else { 0.0 };
        for (x, c) in direction.iter_mut().zip(&centroid.center) {
            *x = c + *x * scale;
        }
        StreamInstance {
            features: direction,
            label: centroid.label,
        }
    }
}

impl InstanceStream for RbfGenerator {
    fn n_classes(&self) -> usize {
        self.config.m
    }

    fn n_features(&self) -> usize {
        self.config.n_features
    }

    fn next_instance(&mut self) -> Option<StreamInstance> {
        if self.emitted >= self.config.instance_count {
            return None;
        }
        self.emitted += 1;
        Some(self.draw())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn collect(cfg: RbfStreamConfig) -> Vec<StreamInstance> {
        let mut g = RbfGenerator::new(cfg).unwrap();
        std::iter::from_fn(|| g.next_instance()).collect()
    }

    #[test]
    fn deterministic_per_seed() {
        let a = collect(RbfStreamConfig::new(3, 42, 200));
        let b = collect(RbfStreamConfig::new(3, 42, 200));
        let c = collect(RbfStreamConfig::new(3, 43, 200));
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.len(), 200);
    }

    #[test]
    fn labels_in_range() {
        let xs = collect(RbfStreamConfig::new(4, 1, 2000));
        assert!(xs.iter().all(|x| x.label < 4 && x.features.len() == 20));
    }

    #[test]
    fn class_frequencies_follow_centroid_weights() {
        let cfg = RbfStreamConfig::new(4, 5, 10_000);
        let priors = RbfGenerator::new(cfg.clone()).unwrap().class_priors();
        assert!((priors.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let xs = collect(cfg);
        let n = xs.len() as f64;
        for (class, &share) in priors.iter().enumerate() {
            let observed = xs.iter().filter(|x| x.label == class).count() as f64;
            let sd = (n * share * (1.0 - share)).sqrt();
            assert!(
                (observed - n * share).abs() <= 5.0 * sd,
                "class {class}: {observed}"
            );
        }
    }

    #[test]
    fn rejects_bad_config() {
        let mut cfg = RbfStreamConfig::new(4, 1, 10);
        cfg.n_centroids = 2;
        assert!(RbfGenerator::new(cfg).is_err());
        assert!(RbfGenerator::new(RbfStreamConfig::new(1, 1, 10)).is_err());
        assert!(RbfGenerator::new(RbfStreamConfig::new(2, 1, 0)).is_err());
    }
}
