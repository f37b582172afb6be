//! Benchmark quality functions with known optima.

pub mod am_gauss;
pub mod frog;

use crate::data::BoundsSpec;

pub use am_gauss::{AmGaussInstance, AmGaussProblem};
pub use frog::Frog;

/// A quality function the learner's predictions can be scored against.
///
/// Inputs are in normalized units.
pub trait Problem: Sync {
    fn dx(&self) -> usize;
    fn da(&self) -> usize;
    fn bounds(&self) -> BoundsSpec;
    fn quality(&self, x: &[f64], a: &[f64]) -> f64;
    /// Optimal parametrization for `x` and the quality it attains.
    fn optimum(&self, x: &[f64]) -> (Vec<f64>, f64);
}
