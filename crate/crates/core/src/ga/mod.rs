//! Pittsburgh-style GA over classifier populations.

mod evolve;
mod individual;
mod operators;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use evolve::{evolve, EvolveOutcome, GenerationStats, Observer};
pub use individual::Individual;
pub use operators::{
    adapt_step_size, crossover, init_population, mutate, random_classifier, rank_population,
    tournament, StepSizeState,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaConfig {
    pub population_size: usize,
    pub elitists: usize,
    pub initial_individual_size: usize,
    /// Complexity weight of the pairwise fitness; has no sensible default.
    pub k: f64,
    pub one_fifth_factor: f64,
    pub crossover_rate: f64,
    pub initial_step_size: f64,
    pub generations: usize,
    pub random_classifier_prob: f64,
    pub clip_mutation: bool,
    pub include_linear: bool,
}

impl GaConfig {
    pub fn with_k(k: f64) -> Self {
        GaConfig {
            population_size: 30,
            elitists: 1,
            initial_individual_size: 30,
            k,
            one_fifth_factor: 1.05,
            crossover_rate: 0.9,
            initial_step_size: 2.0 / 1000.0,
            generations: 100,
            random_classifier_prob: 0.5,
            clip_mutation: true,
            include_linear: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.population_size == 0 {
            return bad("population_size must be positive".into());
        }
        if self.elitists >= self.population_size {
            return bad(format!(
                "elitists ({}) must be smaller than population_size ({})",
                self.elitists, self.population_size
            ));
        }
        if self.initial_individual_size == 0 {
            return bad("initial_individual_size must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.k) {
            return bad(format!("k = {} not in [0, 1]", self.k));
        }
        for (name, v) in [
            ("crossover_rate", self.crossover_rate),
            ("random_classifier_prob", self.random_classifier_prob),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return bad(format!("{name} = {v} not in [0, 1]"));
            }
        }
        if !(self.one_fifth_factor >= 1.0) || !self.one_fifth_factor.is_finite() {
            return bad(format!("one_fifth_factor = {} must be >= 1", self.one_fifth_factor));
        }
        if !(self.initial_step_size > 0.0) || !self.initial_step_size.is_finite() {
            return bad(format!(
                "initial_step_size = {} must be positive",
                self.initial_step_size
            ));
        }
        Ok(())
    }
}
