use proptest::prelude::*;
use votespan_core::eval::{run_cell, DatasetSpec, GridConfig};
use votespan_core::linalg::DEFAULT_RANK_TOL;
use votespan_core::stream::{
    BaseLearner, Combiner, EnsembleConfig, EnsembleModel, HoeffdingConfig, HoeffdingTree,
    InstanceStream, LearnerKind, NaiveBayes, RbfGenerator, RbfStreamConfig, StreamInstance,
};
use votespan_core::DependenceEstimator;

fn rbf(m: usize, seed: u64, count: u64) -> Vec<StreamInstance> {
    let mut g = RbfGenerator::new(RbfStreamConfig::new(m, seed, count)).unwrap();
    std::iter::from_fn(|| g.next_instance()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn learner_votes_are_normalized(m in 2usize..6, seed in any::<u64>()) {
        let data = rbf(m, seed, 600);
        let mut learners: Vec<Box<dyn BaseLearner>> = vec![
            Box::new(HoeffdingTree::new(m, 20, HoeffdingConfig { grace_period: 50.0, ..HoeffdingConfig::default() })),
            Box::new(NaiveBayes::new(m, 20)),
        ];
        for x in &data {
            for l in learners.iter_mut() {
                let v = l.predict_scores(&x.features);
                prop_assert_eq!(v.len(), m);
                prop_assert!((v.as_slice().iter().sum::<f64>() - 1.0).abs() <= 1e-9);
                prop_assert!(v.as_slice().iter().all(|s| *s >= 0.0));
                l.partial_fit(x);
            }
        }
    }

    #[test]
    fn ensemble_prediction_is_a_valid_class(m in 2usize..5, n in 1usize..6, seed in any::<u64>(), geometric in any::<bool>()) {
        let combiner = if geometric { Combiner::Geometric } else { Combiner::Majority };
        let mut cfg = EnsembleConfig::new(n, combiner, seed);
        cfg.learner = LearnerKind::NaiveBayes;
        let mut e = EnsembleModel::new(&cfg, m, 20).unwrap();
        for x in rbf(m, seed, 200) {
            let p = e.predict(&x.features);
            prop_assert!(p.class < m);
            prop_assert_eq!(p.scores.n_rows(), n);
            e.learn(&x, Some(&p)).unwrap();
        }
    }
}

#[test]
fn zero_rate_bagging_leaves_members_identical() {
    let m = 3;
    let mut cfg = EnsembleConfig::new(5, Combiner::Majority, 4);
    cfg.lambda = 0.0;
    let mut e = EnsembleModel::new(&cfg, m, 20).unwrap();
    let mut est = DependenceEstimator::new(m, DEFAULT_RANK_TOL).unwrap();
    for x in rbf(m, 2, 500) {
        let p = e.predict(&x.features);
        est.observe(&p.scores).unwrap();
        e.learn(&x, Some(&p)).unwrap();
    }
    assert!(e.fit_counts().iter().all(|&c| c == 0));
    let report = est.report().unwrap();
    assert_eq!(report.profile.as_slice()[0], 1.0);
    assert_eq!(report.full_rank_fraction(), 0.0);
}

#[test]
fn bagging_multiplicity_averages_lambda() {
    let mut cfg = EnsembleConfig::new(40, Combiner::Majority, 8);
    cfg.learner = LearnerKind::NaiveBayes;
    let mut e = EnsembleModel::new(&cfg, 2, 20).unwrap();
    let data = rbf(2, 3, 5_000);
    for x in &data {
        e.oza_update(x);
    }
    let total: u64 = e.fit_counts().iter().sum();
    let mean = total as f64 / (40.0 * data.len() as f64);
    assert!((mean - 1.0).abs() <= 0.02, "mean multiplicity {mean}");
}

#[test]
fn cells_are_deterministic() {
    let spec = DatasetSpec::Rbf {
        name: "RBF3".into(),
        config: RbfStreamConfig::new(3, 0, 2_000),
    };
    let prepared = spec.prepare().unwrap();
    let cfg = GridConfig {
        instance_limit: 2_000,
        ..GridConfig::default()
    };
    for method in [Combiner::Majority, Combiner::Geometric] {
        let a = run_cell(&prepared, method, 4, 1, &cfg).unwrap();
        let b = run_cell(&prepared, method, 4, 1, &cfg).unwrap();
        let c = run_cell(&prepared, method, 4, 2, &cfg).unwrap();
        assert_eq!(a, b);
        assert!(a != c);
        assert_eq!(a.instances, 2_000);
    }
}

#[test]
fn csv_dataset_streams_through_a_cell() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("toy.csv");
    let mut text = String::from("a,b,label\n");
    for x in rbf(2, 5, 400) {
        text.push_str(&format!(
            "{},{},c{}\n",
            x.features[0], x.features[1], x.label
        ));
    }
    std::fs::write(&path, text).unwrap();
    let prepared = DatasetSpec::Csv {
        name: "toy".into(),
        path: path.clone(),
    }
    .prepare()
    .unwrap();
    assert_eq!(prepared.m(), 2);
    let cell = run_cell(&prepared, Combiner::Majority, 3, 0, &GridConfig::default()).unwrap();
    assert_eq!(cell.instances, 400);
    assert!((0.0..=1.0).contains(&cell.accuracy));
}
