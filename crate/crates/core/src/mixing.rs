//! Combining matching classifiers into system predictions.
//!
//! Weights are inverse `(error + 1)`, normalized over the match set of the
//! query situation, so a classifier's weight depends on which others match.

use crate::classifier::Classifier;
use crate::error::{Error, Result};

/// Quality returned when no classifier matches.
pub const DEFAULT_QUALITY: f64 = 0.0;

/// A prediction plus whether any classifier covered the situation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Covered<T> {
    pub value: T,
    pub covered: bool,
}

/// Fitted classifiers matching `x`, in population order.
pub fn match_set<'a>(classifiers: &'a [Classifier], x: &[f64]) -> Vec<&'a Classifier> {
    classifiers
        .iter()
        .filter(|c| c.is_fitted() && c.condition.contains(x))
        .collect()
}

pub fn mix_weights(errors: &[f64]) -> Result<Vec<f64>> {
    if errors.is_empty() {
        return Err(Error::Usage("mixing weights of an empty match set"));
    }
    let total: f64 = errors.iter().map(|e| e + 1.0).sum();
    let raw: Vec<f64> = errors.iter().map(|e| total / (e + 1.0)).collect();
    let norm: f64 = raw.iter().sum();
    Ok(raw.into_iter().map(|g| g / norm).collect())
}

fn weights_of(ms: &[&Classifier]) -> Vec<f64> {
    let errors: Vec<f64> = ms.iter().map(|c| c.train_error).collect();
    mix_weights(&errors).expect("non-empty match set")
}

pub fn predict_quality(classifiers: &[Classifier], x: &[f64], a: &[f64]) -> Covered<f64> {
    let ms = match_set(classifiers, x);
    match ms.len() {
        0 => Covered {
            value: DEFAULT_QUALITY,
            covered: false,
        },
        1 => Covered {
            value: ms[0].local_predict(x, a).expect("match set holds fitted classifiers"),
            covered: true,
        },
        _ => {
            let value = weights_of(&ms)
                .iter()
                .zip(&ms)
                .map(|(g, c)| g * c.local_predict(x, a).expect("fitted"))
                .sum();
            Covered {
                value,
                covered: true,
            }
        }
    }
}

/// Weighted mean of the matching classifiers' own argmaxes.
pub fn predict_parametrization(classifiers: &[Classifier], x: &[f64], da: usize) -> Covered<Vec<f64>> {
    let ms = match_set(classifiers, x);
    match ms.len() {
        0 => Covered {
            value: vec![0.0; da],
            covered: false,
        },
        1 => Covered {
            value: ms[0].local_argmax(x).expect("fitted"),
            covered: true,
        },
        _ => {
            let mut out = vec![0.0; da];
            for (g, c) in weights_of(&ms).iter().zip(&ms) {
                for (o, v) in out.iter_mut().zip(c.local_argmax(x).expect("fitted")) {
                    *o += g * v;
                }
            }
            out.iter_mut().for_each(|v| *v = v.clamp(-1.0, 1.0));
            Covered {
                value: out,
                covered: true,
            }
        }
    }
}
