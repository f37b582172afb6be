use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifier::Classifier;
use crate::data::Dataset;
use crate::mixing::{self, Covered};

/// One candidate rule set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    pub dx: usize,
    pub da: usize,
    pub classifiers: Vec<Classifier>,
    /// Mean squared quality-prediction error on the validation set.
    pub valid_error: f64,
}

impl Individual {
    /// Builds an individual whose validation error is not yet known.
    pub fn new(dx: usize, da: usize, classifiers: Vec<Classifier>) -> Self {
        Individual {
            dx,
            da,
            classifiers,
            valid_error: f64::NAN,
        }
    }

    pub fn len(&self) -> usize {
        self.classifiers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classifiers.is_empty()
    }

    pub fn predict_quality(&self, x: &[f64], a: &[f64]) -> Covered<f64> {
        mixing::predict_quality(&self.classifiers, x, a)
    }

    pub fn predict_parametrization(&self, x: &[f64]) -> Covered<Vec<f64>> {
        mixing::predict_parametrization(&self.classifiers, x, self.da)
    }

    pub fn mse(&self, data: &Dataset) -> f64 {
        if data.is_empty() {
            return 0.0;
        }
        let sse: f64 = data
            .iter()
            .map(|e| {
                let r = e.q - self.predict_quality(&e.x, &e.a).value;
                r * r
            })
            .sum();
        sse / data.len() as f64
    }

    /// Refits every classifier whose matched training set changed, then
    /// recomputes the validation error.
    pub fn refresh(&mut self, train: &Dataset, valid: &Dataset, include_linear: bool) {
        for c in &mut self.classifiers {
            c.refit(train, include_linear);
        }
        self.valid_error = self.mse(valid);
    }

    pub fn evaluate(&mut self, valid: &Dataset) {
        self.valid_error = self.mse(valid);
    }

    pub fn unmatched_count(&self, data: &Dataset) -> usize {
        data.iter()
            .filter(|e| !self.classifiers.iter().any(|c| c.condition.contains(&e.x)))
            .count()
    }
}

pub(crate) fn refresh_all(pop: &mut [Individual], train: &Dataset, valid: &Dataset, include_linear: bool) {
    pop.par_iter_mut()
        .for_each(|ind| ind.refresh(train, valid, include_linear));
}
