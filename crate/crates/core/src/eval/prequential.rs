use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stream::{EnsembleModel, InstanceStream, Prediction, StreamInstance};
use crate::votes::VoteMatrix;

/// A model that can be scored before it trains on each instance.
pub trait OnlineClassifier {
    fn predict(&mut self, features: &[f64]) -> Prediction;
    fn learn(&mut self, instance: &StreamInstance, prediction: &Prediction) -> Result<()>;
}

impl OnlineClassifier for EnsembleModel {
    fn predict(&mut self, features: &[f64]) -> Prediction {
        EnsembleModel::predict(self, features)
    }

    fn learn(&mut self, instance: &StreamInstance, prediction: &Prediction) -> Result<()> {
        EnsembleModel::learn(self, instance, Some(prediction))
    }
}

/// Accuracy trace of a test-then-train pass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrequentialRecord {
    pub instances: u64,
    pub correct: u64,
    pub accuracy: f64,
    /// `(last instance index, accuracy)` for each consecutive window; the
    /// final window may be partial.
    pub windowed_accuracies: Vec<(u64, f64)>,
}

/// Runs interleaved test-then-train over at most `limit` instances.
///
/// Every instance is predicted first and its member votes handed to
/// `on_votes` before the model trains on it. A stream shorter than `limit`
/// is processed to its end.
pub fn prequential_run<S, C, F>(
    stream: &mut S,
    model: &mut C,
    limit: u64,
    window: u64,
    mut on_votes: F,
) -> Result<PrequentialRecord>
where
    S: InstanceStream + ?Sized,
    C: OnlineClassifier + ?Sized,
    F: FnMut(&VoteMatrix) -> Result<()>,
{
    if limit == 0 {
        return Err(Error::validation("prequential limit must be positive"));
    }
    if window == 0 {
        return Err(Error::validation("accuracy window must be positive"));
    }
    let mut instances = 0u64;
    let mut correct = 0u64;
    let mut window_correct = 0u64;
    let mut windowed = Vec::new();
    while instances < limit {
        let Some(instance) = stream.next_instance() else {
            break;
        };
        let prediction = model.predict(&instance.features);
        on_votes(&prediction.scores)?;
        let hit = u64::from(prediction.class == instance.label);
        correct += hit;
        window_correct += hit;
        model.learn(&instance, &prediction)?;
        instances += 1;
        if instances.is_multiple_of(window) {
            windowed.push((instances, window_correct as f64 / window as f64));
            window_correct = 0;
        }
    }
    if instances == 0 {
        return Err(Error::validation("stream produced no instances"));
    }
    let tail = instances % window;
    if tail != 0 {
        windowed.push((instances, window_correct as f64 / tail as f64));
    }
    Ok(PrequentialRecord {
        instances,
        correct,
        accuracy: correct as f64 / instances as f64,
        windowed_accuracies: windowed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::SliceStream;
    use crate::votes::VoteVector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Reads the label out of the first feature.
    struct Oracle;

    impl OnlineClassifier for Oracle {
        fn predict(&mut self, features: &[f64]) -> Prediction {
            let class = features[0] as usize;
            let scores = VoteMatrix::from_votes(vec![VoteVector::one_hot(2, class)]).unwrap();
            Prediction { scores, class }
        }
        fn learn(&mut self, _: &StreamInstance, _: &Prediction) -> Result<()> {
            Ok(())
        }
    }

    struct Constant(usize);

    impl OnlineClassifier for Constant {
        fn predict(&mut self, _: &[f64]) -> Prediction {
            let scores = VoteMatrix::from_votes(vec![VoteVector::one_hot(2, self.0)]).unwrap();
            Prediction {
                scores,
                class: self.0,
            }
        }
        fn learn(&mut self, _: &StreamInstance, _: &Prediction) -> Result<()> {
            Ok(())
        }
    }

    fn labelled(n: usize, p0: f64, seed: u64) -> Vec<StreamInstance> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let label = usize::from(rng.random::<f64>() >= p0);
                StreamInstance {
                    features: vec![label as f64],
                    label,
                }
            })
            .collect()
    }

    #[test]
    fn oracle_is_perfect() {
        let data = labelled(2500, 0.5, 1);
        let mut s = SliceStream::new(&data, 2, 1);
        let mut seen = 0;
        let rec = prequential_run(&mut s, &mut Oracle, 10_000, 1000, |_| {
            seen += 1;
            Ok(())
        })
        .unwrap();
        assert_eq!(rec.instances, 2500);
        assert_eq!(rec.accuracy, 1.0);
        assert_eq!(seen, 2500);
        assert_eq!(
            rec.windowed_accuracies,
            vec![(1000, 1.0), (2000, 1.0), (2500, 1.0)]
        );
    }

    #[test]
    fn constant_predictor_matches_class_share() {
        let n = 20_000;
        let data = labelled(n, 0.7, 2);
        let mut s = SliceStream::new(&data, 2, 1);
        let rec = prequential_run(&mut s, &mut Constant(0), n as u64, 1000, |_| Ok(())).unwrap();
        let sd = (0.7 * 0.3 / n as f64).sqrt();
        assert!((rec.accuracy - 0.7).abs() < 4.0 * sd, "{}", rec.accuracy);
    }

    #[test]
    fn limit_and_empty_stream() {
        let data = labelled(10, 0.5, 3);
        let mut s = SliceStream::new(&data, 2, 1);
        assert!(prequential_run(&mut s, &mut Oracle, 0, 10, |_| Ok(())).is_err());
        let rec = prequential_run(&mut s, &mut Oracle, 4, 10, |_| Ok(())).unwrap();
        assert_eq!(rec.instances, 4);
        let empty: Vec<StreamInstance> = Vec::new();
        let mut s = SliceStream::new(&empty, 2, 1);
        assert!(prequential_run(&mut s, &mut Oracle, 5, 10, |_| Ok(())).is_err());
    }
}
