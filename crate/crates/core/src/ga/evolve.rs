use rand::Rng;

use super::individual::{refresh_all, Individual};
use super::operators::{adapt_step_size, init_population, perturb, rank_population, select, shuffle_split, StepSizeState};
use super::GaConfig;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::seeds::{self, Stream};

/// Summary of one generation's elitist and step-size adaptation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerationStats {
    /// 1-based; generation 0 is the initial population.
    pub generation: usize,
    pub elitist_valid_error: f64,
    pub elitist_len: usize,
    pub population_size: usize,
    /// Step size after this generation's adaptation.
    pub step_size: f64,
    pub success_ratio: f64,
}

pub trait Observer {
    fn observe(&mut self, stats: &GenerationStats, elitist: &Individual) -> Result<()>;
}

impl<F> Observer for F
where
    F: FnMut(&GenerationStats, &Individual) -> Result<()>,
{
    fn observe(&mut self, stats: &GenerationStats, elitist: &Individual) -> Result<()> {
        self(stats, elitist)
    }
}

#[derive(Debug, Clone)]
pub struct EvolveOutcome {
    pub elitist: Individual,
    pub history: Vec<GenerationStats>,
}

/// Generational GA with elitism.
///
/// All random draws of generation `g` come from a stream derived from one
/// base seed taken from `rng`; refitting runs in parallel but draws nothing.
pub fn evolve<R: Rng + ?Sized>(
    config: &GaConfig,
    train: &Dataset,
    valid: &Dataset,
    rng: &mut R,
    observer: &mut dyn Observer,
) -> Result<EvolveOutcome> {
    config.validate()?;
    if train.is_empty() || valid.is_empty() {
        return Err(Error::EmptyData("evolve needs non-empty train and validation sets"));
    }
    if train.dx() != valid.dx() || train.da() != valid.da() {
        return Err(Error::Dimension {
            expected: train.dx() + train.da(),
            got: valid.dx() + valid.da(),
            context: "train vs validation dimensions",
        });
    }
    let base: u64 = rng.random();
    let gen_rng = |g: usize| seeds::rng(base, Stream::Generation, g as u64);

    let pop = init_population(config, &mut gen_rng(0), train, valid);
    let mut ranked = rank_population(pop, config.k);
    let mut step = StepSizeState::new(config.initial_step_size);
    let mut history = Vec::with_capacity(config.generations);

    for g in 1..=config.generations {
        let mut rng = gen_rng(g);
        let mut next: Vec<Individual> = ranked[..config.elitists].to_vec();
        let n_offspring = config.population_size - config.elitists;
        let mut offspring: Vec<Individual> = Vec::with_capacity(n_offspring);
        let mut parent_errors: Vec<f64> = Vec::with_capacity(n_offspring);
        while offspring.len() < n_offspring {
            let p1 = select(&ranked, config.k, &mut rng);
            let p2 = select(&ranked, config.k, &mut rng);
            let (mut c1, mut c2) = if rng.random_bool(config.crossover_rate) {
                shuffle_split(p1, p2, &mut rng)
            } else {
                (p1.clone(), p2.clone())
            };
            let (e1, e2) = (p1.valid_error, p2.valid_error);
            perturb(&mut c1, step.s, config, &mut rng);
            perturb(&mut c2, step.s, config, &mut rng);
            offspring.push(c1);
            parent_errors.push(e1);
            if offspring.len() < n_offspring {
                offspring.push(c2);
                parent_errors.push(e2);
            }
        }
        refresh_all(&mut offspring, train, valid, config.include_linear);
        for (child, parent_error) in offspring.iter().zip(&parent_errors) {
            step.record(child.valid_error < *parent_error);
        }
        let success_ratio = step.success_ratio();
        step = adapt_step_size(step, config);

        next.extend(offspring);
        ranked = rank_population(next, config.k);
        let stats = GenerationStats {
            generation: g,
            elitist_valid_error: ranked[0].valid_error,
            elitist_len: ranked[0].len(),
            population_size: ranked.len(),
            step_size: step.s,
            success_ratio,
        };
        observer.observe(&stats, &ranked[0])?;
        history.push(stats);
    }

    Ok(EvolveOutcome {
        elitist: ranked.swap_remove(0),
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::frog;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn data() -> (Dataset, Dataset) {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        (frog::dataset(50, &mut rng), frog::dataset(50, &mut rng))
    }

    fn noop() -> impl FnMut(&GenerationStats, &Individual) -> Result<()> {
        |_: &GenerationStats, _: &Individual| Ok(())
    }

    #[test]
    fn zero_generations_returns_best_initial() {
        let (train, valid) = data();
        let mut cfg = GaConfig::with_k(0.1);
        cfg.generations = 0;
        let out = evolve(&cfg, &train, &valid, &mut ChaCha8Rng::seed_from_u64(1), &mut noop()).unwrap();
        assert!(out.history.is_empty());
        assert_eq!(out.elitist.len(), 30);
    }

    #[test]
    fn identical_seeds_identical_history() {
        let (train, valid) = data();
        let mut cfg = GaConfig::with_k(0.1);
        cfg.generations = 15;
        let run = || evolve(&cfg, &train, &valid, &mut ChaCha8Rng::seed_from_u64(5), &mut noop()).unwrap();
        let (a, b) = (run(), run());
        assert_eq!(a.history, b.history);
        assert_eq!(a.elitist, b.elitist);
    }

    #[test]
    fn observer_sees_every_generation() {
        let (train, valid) = data();
        let mut cfg = GaConfig::with_k(0.1);
        cfg.generations = 7;
        let mut seen = Vec::new();
        let mut obs = |s: &GenerationStats, e: &Individual| {
            assert_eq!(s.elitist_len, e.len());
            seen.push(s.generation);
            Ok(())
        };
        let out = evolve(&cfg, &train, &valid, &mut ChaCha8Rng::seed_from_u64(2), &mut obs).unwrap();
        assert_eq!(seen, (1..=7).collect::<Vec<_>>());
        assert!(out.history.iter().all(|s| s.step_size > 0.0));
    }

    #[test]
    fn invalid_config_rejected() {
        let (train, valid) = data();
        let mut cfg = GaConfig::with_k(0.1);
        cfg.elitists = 30;
        assert!(evolve(&cfg, &train, &valid, &mut ChaCha8Rng::seed_from_u64(2), &mut noop()).is_err());
    }
}
