//! Evaluation quantities for a trained individual.

use rayon::prelude::*;
use serde::Serialize;

use crate::data::{denormalize, Dataset};
use crate::error::{Error, Result};
use crate::ga::Individual;
use crate::problems::Problem;

pub fn mse(predictions: &[f64], targets: &[f64]) -> Result<f64> {
    if predictions.is_empty() {
        return Err(Error::Usage("mse of empty input"));
    }
    if predictions.len() != targets.len() {
        return Err(Error::Dimension {
            expected: targets.len(),
            got: predictions.len(),
            context: "predictions vs targets",
        });
    }
    let sse: f64 = predictions
        .iter()
        .zip(targets)
        .map(|(p, t)| (p - t) * (p - t))
        .sum();
    Ok(sse / predictions.len() as f64)
}

pub fn rmse(predictions: &[f64], targets: &[f64]) -> Result<f64> {
    mse(predictions, targets).map(f64::sqrt)
}

pub fn unmatched_count(ind: &Individual, data: &Dataset) -> usize {
    ind.unmatched_count(data)
}

/// Holdout examples with their true optimal parametrizations precomputed.
#[derive(Debug, Clone)]
pub struct EvalSet {
    pub data: Dataset,
    /// Normalized optimal parametrization and its true quality, per example.
    pub optima: Vec<(Vec<f64>, f64)>,
}

impl EvalSet {
    pub fn new(data: Dataset, problem: &dyn Problem) -> Self {
        let optima = data
            .examples()
            .par_iter()
            .map(|e| problem.optimum(&e.x))
            .collect();
        EvalSet { data, optima }
    }
}

/// RMSE of `q(x, a_max(x)) - q(x, â_max(x))` over the evaluation situations,
/// with `q` the true problem function.
pub fn choice_gap(ind: &Individual, eval: &EvalSet, problem: &dyn Problem) -> f64 {
    let n = eval.data.len();
    if n == 0 {
        return 0.0;
    }
    // Collected before summing so the result does not depend on thread scheduling.
    let sum: f64 = eval
        .data
        .examples()
        .par_iter()
        .zip(&eval.optima)
        .map(|(e, (_, q_opt))| {
            let a_hat = ind.predict_parametrization(&e.x).value;
            let gap = q_opt - problem.quality(&e.x, &a_hat);
            gap * gap
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum();
    (sum / n as f64).sqrt()
}

/// Mean of `‖â − a_opt‖²` in native parametrization units.
pub fn action_mse(ind: &Individual, eval: &EvalSet, problem: &dyn Problem) -> f64 {
    let n = eval.data.len();
    if n == 0 {
        return 0.0;
    }
    let bounds = problem.bounds().parametrization;
    let sum: f64 = eval
        .data
        .examples()
        .par_iter()
        .zip(&eval.optima)
        .map(|(e, (a_opt, _))| {
            let a_hat = ind.predict_parametrization(&e.x).value;
            let a_hat = denormalize(&a_hat, &bounds).expect("predictions lie in [-1, 1]");
            let a_opt = denormalize(a_opt, &bounds).expect("optima lie in [-1, 1]");
            a_hat
                .iter()
                .zip(&a_opt)
                .map(|(p, t)| (p - t) * (p - t))
                .sum::<f64>()
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum();
    sum / n as f64
}

pub fn quality_rmse(ind: &Individual, data: &Dataset) -> f64 {
    ind.mse(data).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenerationMetrics {
    pub generation: usize,
    pub rmse_quality_train: f64,
    pub rmse_quality_valid: f64,
    pub rmse_quality_holdout: f64,
    pub rmse_choice_gap_holdout: f64,
    pub mse_action_holdout: f64,
    pub n_classifiers_elitist: usize,
    pub unmatched_train: usize,
    pub step_size: f64,
}

impl GenerationMetrics {
    pub const HEADER: &'static str = "generation,rmse_quality_train,rmse_quality_valid,rmse_quality_holdout,rmse_choice_gap_holdout,mse_action_holdout,n_classifiers_elitist,unmatched_train,step_size";

    #[allow(clippy::too_many_arguments)]
    pub fn compute(
        generation: usize,
        elitist: &Individual,
        train: &Dataset,
        valid: &Dataset,
        holdout: &EvalSet,
        problem: &dyn Problem,
        step_size: f64,
    ) -> Result<Self> {
        let m = GenerationMetrics {
            generation,
            rmse_quality_train: quality_rmse(elitist, train),
            rmse_quality_valid: quality_rmse(elitist, valid),
            rmse_quality_holdout: quality_rmse(elitist, &holdout.data),
            rmse_choice_gap_holdout: choice_gap(elitist, holdout, problem),
            mse_action_holdout: action_mse(elitist, holdout, problem),
            n_classifiers_elitist: elitist.len(),
            unmatched_train: unmatched_count(elitist, train),
            step_size,
        };
        m.check_finite()?;
        Ok(m)
    }

    fn check_finite(&self) -> Result<()> {
        for (metric, v) in [
            ("rmse_quality_train", self.rmse_quality_train),
            ("rmse_quality_valid", self.rmse_quality_valid),
            ("rmse_quality_holdout", self.rmse_quality_holdout),
            ("rmse_choice_gap_holdout", self.rmse_choice_gap_holdout),
            ("mse_action_holdout", self.mse_action_holdout),
            ("step_size", self.step_size),
        ] {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    metric,
                    generation: self.generation,
                });
            }
        }
        Ok(())
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{:?},{:?},{:?},{:?},{:?},{},{},{:?}",
            self.generation,
            self.rmse_quality_train,
            self.rmse_quality_valid,
            self.rmse_quality_holdout,
            self.rmse_choice_gap_holdout,
            self.mse_action_holdout,
            self.n_classifiers_elitist,
            self.unmatched_train,
            self.step_size
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::{Classifier, IntervalCondition, LocalModel};
    use crate::data::Example;
    use crate::problems::Frog;

    #[test]
    fn mse_examples() {
        assert_eq!(mse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(mse(&[0.0, 0.0], &[1.0, 1.0]).unwrap(), 1.0);
        assert_eq!(rmse(&[0.0, 0.0], &[1.0, 1.0]).unwrap(), 1.0);
        assert!((mse(&[1.0, 2.0, 3.0], &[2.0, 2.0, 2.0]).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!(mse(&[], &[]).is_err());
    }

    /// Single full-range classifier whose argmax is `slope * x` (normalized).
    fn linear_policy(slope: f64) -> Individual {
        let model = LocalModel {
            intercept: 0.0,
            w_xx: vec![0.0],
            w_xa: vec![2.0 * slope],
            w_aa: vec![-1.0],
            w_x: None,
            w_a: None,
        };
        let c = Classifier::with_model(IntervalCondition::full(1), model, 0.0, 1);
        Individual::new(1, 1, vec![c])
    }

    fn frog_eval(xs_native: &[f64]) -> EvalSet {
        let ex = xs_native
            .iter()
            .map(|&x| Example {
                x: vec![2.0 * x - 1.0],
                a: vec![0.0],
                q: 0.0,
            })
            .collect();
        EvalSet::new(Dataset::new(1, 1, ex).unwrap(), &Frog)
    }

    #[test]
    fn oracle_policy_has_zero_gap() {
        // Normalized optimum is a = -x.
        let eval = frog_eval(&[0.1, 0.35, 0.5, 0.9]);
        let ind = linear_policy(-1.0);
        assert!(choice_gap(&ind, &eval, &Frog) < 1e-12);
        assert!(action_mse(&ind, &eval, &Frog) < 1e-24);
    }

    #[test]
    fn identity_policy_gap_on_frog() {
        // â = x (native) at x = 0.2: gap = 1 - q(0.2, 0.2) = 0.6.
        let eval = frog_eval(&[0.2]);
        let ind = linear_policy(1.0);
        assert!((choice_gap(&ind, &eval, &Frog) - 0.6).abs() < 1e-12);
        assert!((action_mse(&ind, &eval, &Frog) - 0.36).abs() < 1e-12);
    }

    #[test]
    fn unmatched_examples() {
        let xs = [-0.9, -0.4, 0.0, 0.3, 0.8];
        let data = Dataset::new(
            1,
            1,
            xs.iter()
                .map(|&x| Example {
                    x: vec![x],
                    a: vec![0.0],
                    q: 0.0,
                })
                .collect(),
        )
        .unwrap();
        let full = Individual::new(1, 1, vec![Classifier::unfitted(IntervalCondition::full(1))]);
        assert_eq!(unmatched_count(&full, &data), 0);
        let none = Individual::new(
            1,
            1,
            vec![Classifier::unfitted(IntervalCondition::new(vec![0.95], vec![1.0]).unwrap())],
        );
        assert_eq!(unmatched_count(&none, &data), 5);
        // [-1, -0.5] covers -0.9; [0.1, 0.5] covers 0.3; -0.4, 0.0, 0.8 stay uncovered.
        let two = Individual::new(
            1,
            1,
            vec![
                Classifier::unfitted(IntervalCondition::new(vec![-1.0], vec![-0.5]).unwrap()),
                Classifier::unfitted(IntervalCondition::new(vec![0.1], vec![0.5]).unwrap()),
            ],
        );
        assert_eq!(unmatched_count(&two, &data), 3);
    }
}
