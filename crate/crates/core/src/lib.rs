//! Rule-based regression for parametrization optimization.
//!
//! A population of interval-conditioned local quadratic models learns a
//! quality function `q(x, a)` over situations `x` and parametrizations `a`.
//! The learned model predicts qualities and, per situation, a parametrization
//! that maximizes the predicted quality. Rule sets are evolved by a
//! Pittsburgh-style genetic algorithm that trades validation error against
//! the number of rules.

pub mod classifier;
pub mod data;
pub mod error;
pub mod ga;
pub mod harness;
pub mod linalg;
pub mod metrics;
pub mod mixing;
pub mod problems;
pub mod seeds;

pub use classifier::{Classifier, IntervalCondition, LocalModel};
pub use data::{Bound, BoundsSpec, Dataset, Example};
pub use error::{Error, Result};
pub use ga::{evolve, GaConfig, Individual};
