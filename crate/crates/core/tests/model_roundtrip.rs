use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use suprb::classifier::{Classifier, IntervalCondition, LocalModel};
use suprb::harness::{evaluate_model, ExperimentConfig, ModelFile};
use suprb::problems::{frog, Frog};
use suprb::Individual;

#[test]
fn serialized_model_predicts_identically() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::parse("k = 1e-6\nproblem = \"am-gauss\"\nn_train_pool = 600\nn_holdout = 50\ngenerations = 4\ninclude_linear = true\noracle_restarts = 4", &[]).unwrap();
    cfg.output_dir = dir.path().to_path_buf();
    let outcome = suprb::harness::train(&cfg, |_, _| {}).unwrap().remove(0);
    let reread = ModelFile::read(&outcome.model_path).unwrap();
    assert_eq!(reread, outcome.model);

    let (a, b) = (&outcome.model.elitist, &reread.elitist);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..1000 {
        let x: Vec<f64> = (0..5).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let act: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let (qa, qb) = (a.predict_quality(&x, &act), b.predict_quality(&x, &act));
        assert!((qa.value - qb.value).abs() <= 1e-12);
        assert_eq!(qa.covered, qb.covered);
        let (pa, pb) = (a.predict_parametrization(&x).value, b.predict_parametrization(&x).value);
        assert!(pa.iter().zip(&pb).all(|(u, v)| (u - v).abs() <= 1e-12));
    }
}

#[test]
fn oracle_policy_has_no_choice_gap() {
    // Normalized frog optimum is a = -x: curvature -1 with slope -2x puts
    // the vertex there.
    let model = LocalModel {
        intercept: 0.0,
        w_xx: vec![0.0],
        w_xa: vec![-2.0],
        w_aa: vec![-1.0],
        w_x: None,
        w_a: None,
    };
    let ind = Individual::new(1, 1, vec![Classifier::with_model(IntervalCondition::full(1), model, 0.0, 1)]);
    let holdout = frog::dataset(1000, &mut ChaCha8Rng::seed_from_u64(3));
    let report = evaluate_model(&ind, holdout, &Frog).unwrap();
    assert!(report.rmse_choice_gap_holdout <= 1e-8, "{report:?}");
    assert!(report.mse_action_holdout <= 1e-16);
    assert_eq!(report.unmatched_fraction, 0.0);
}
