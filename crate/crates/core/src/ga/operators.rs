use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::individual::{refresh_all, Individual};
use super::GaConfig;
use crate::classifier::Classifier;
use crate::data::Dataset;

pub fn random_classifier<R: Rng + ?Sized>(rng: &mut R, dx: usize) -> Classifier {
    Classifier::random(rng, dx)
}

/// `population_size` individuals of `initial_individual_size` random
/// classifiers each, fitted once and evaluated on `valid`.
pub fn init_population<R: Rng + ?Sized>(
    config: &GaConfig,
    rng: &mut R,
    train: &Dataset,
    valid: &Dataset,
) -> Vec<Individual> {
    let (dx, da) = (train.dx(), train.da());
    let mut pop: Vec<Individual> = (0..config.population_size)
        .map(|_| {
            let cls = (0..config.initial_individual_size)
                .map(|_| random_classifier(rng, dx))
                .collect();
            Individual::new(dx, da, cls)
        })
        .collect();
    refresh_all(&mut pop, train, valid, config.include_linear);
    pop
}

/// Shared mutation step size and the success tally of the current generation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSizeState {
    pub s: f64,
    pub success_count: usize,
    pub trial_count: usize,
}

impl StepSizeState {
    pub fn new(s: f64) -> Self {
        assert!(s > 0.0, "step size must be positive");
        StepSizeState {
            s,
            success_count: 0,
            trial_count: 0,
        }
    }

    pub fn record(&mut self, success: bool) {
        self.trial_count += 1;
        if success {
            self.success_count += 1;
        }
    }

    pub fn success_ratio(&self) -> f64 {
        if self.trial_count == 0 {
            0.0
        } else {
            self.success_count as f64 / self.trial_count as f64
        }
    }
}

/// One-fifth rule: grow `s` by `F` above a 1/5 success ratio, shrink below.
pub fn adapt_step_size(step: StepSizeState, config: &GaConfig) -> StepSizeState {
    let mut s = step.s;
    if step.trial_count > 0 {
        // Compare 5 * successes with trials to keep r == 1/5 exact.
        let lhs = 5 * step.success_count;
        if lhs > step.trial_count {
            s *= config.one_fifth_factor;
        } else if lhs < step.trial_count {
            s /= config.one_fifth_factor;
        }
    }
    StepSizeState::new(s)
}

/// Perturbs every bound by `s * N(0, 1)`, clips, repairs inverted
/// intervals and maybe appends one random classifier. Does not refit.
pub(crate) fn perturb<R: Rng + ?Sized>(ind: &mut Individual, s: f64, config: &GaConfig, rng: &mut R) {
    for c in &mut ind.classifiers {
        let cond = &mut c.condition;
        for d in 0..cond.lower.len() {
            let n1: f64 = StandardNormal.sample(rng);
            let n2: f64 = StandardNormal.sample(rng);
            let mut lo = cond.lower[d] + s * n1;
            let mut hi = cond.upper[d] + s * n2;
            if config.clip_mutation {
                lo = lo.clamp(-1.0, 1.0);
                hi = hi.clamp(-1.0, 1.0);
            }
            if lo > hi {
                std::mem::swap(&mut lo, &mut hi);
            }
            cond.lower[d] = lo;
            cond.upper[d] = hi;
        }
    }
    if rng.random_bool(config.random_classifier_prob) {
        ind.classifiers.push(random_classifier(rng, ind.dx));
    }
}

pub fn mutate<R: Rng + ?Sized>(
    ind: &Individual,
    step: &StepSizeState,
    config: &GaConfig,
    rng: &mut R,
    train: &Dataset,
    valid: &Dataset,
) -> Individual {
    let mut child = ind.clone();
    perturb(&mut child, step.s, config, rng);
    child.refresh(train, valid, config.include_linear);
    child
}

/// Shuffles both parents' classifiers together and splits them into two
/// children; the first child's size is a rounded `N((l1 + l2) / 2, 1)` draw.
pub(crate) fn shuffle_split<R: Rng + ?Sized>(
    p1: &Individual,
    p2: &Individual,
    rng: &mut R,
) -> (Individual, Individual) {
    let total = p1.len() + p2.len();
    assert!(!p1.is_empty() && !p2.is_empty(), "crossover parents must be non-empty");
    let mean = total as f64 / 2.0;
    let size1 = loop {
        let z: f64 = StandardNormal.sample(rng);
        let l = (mean + z).round();
        if l >= 1.0 && l <= (total - 1) as f64 {
            break l as usize;
        }
    };
    let mut pool: Vec<Classifier> = p1
        .classifiers
        .iter()
        .chain(&p2.classifiers)
        .cloned()
        .collect();
    pool.shuffle(rng);
    let rest = pool.split_off(size1);
    (
        Individual::new(p1.dx, p1.da, pool),
        Individual::new(p1.dx, p1.da, rest),
    )
}

pub fn crossover<R: Rng + ?Sized>(
    p1: &Individual,
    p2: &Individual,
    rng: &mut R,
    valid: &Dataset,
) -> (Individual, Individual) {
    let (mut c1, mut c2) = shuffle_split(p1, p2, rng);
    c1.evaluate(valid);
    c2.evaluate(valid);
    (c1, c2)
}

/// Pairwise fitness: `true` when `i1` beats `i2`.
///
/// `i1` wins if `e1 < e2` and `l1 <= (e2 / e1) l2`, or if `e1 >= e2` and
/// `l1 <= k (e2 / e1) l2`; otherwise `i2` wins. Exact ties in both error
/// and size go to `i1`.
pub fn tournament(i1: &Individual, i2: &Individual, k: f64) -> bool {
    let (e1, e2) = (i1.valid_error, i2.valid_error);
    let (l1, l2) = (i1.len() as f64, i2.len() as f64);
    if e1 == e2 && l1 == l2 {
        return true;
    }
    if e1 == 0.0 {
        return if e2 > 0.0 { true } else { l1 <= l2 };
    }
    let ratio = e2 / e1;
    if e1 < e2 {
        l1 <= ratio * l2
    } else {
        l1 <= k * ratio * l2
    }
}

/// Orders the population by round-robin tournament wins over all ordered
/// pairs; ties go to lower validation error, then smaller size, then input
/// order.
pub fn rank_population(pop: Vec<Individual>, k: f64) -> Vec<Individual> {
    let n = pop.len();
    let mut wins = vec![0usize; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            if tournament(&pop[i], &pop[j], k) {
                wins[i] += 1;
            } else {
                wins[j] += 1;
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        wins[b]
            .cmp(&wins[a])
            .then(pop[a].valid_error.total_cmp(&pop[b].valid_error))
            .then(pop[a].len().cmp(&pop[b].len()))
            .then(a.cmp(&b))
    });
    let mut slots: Vec<Option<Individual>> = pop.into_iter().map(Some).collect();
    order
        .into_iter()
        .map(|i| slots[i].take().expect("each index once"))
        .collect()
}

/// Size-2 tournament between two uniformly drawn members.
pub(crate) fn select<'a, R: Rng + ?Sized>(pop: &'a [Individual], k: f64, rng: &mut R) -> &'a Individual {
    let a = &pop[rng.random_range(0..pop.len())];
    let b = &pop[rng.random_range(0..pop.len())];
    if tournament(a, b, k) {
        a
    } else {
        b
    }
}
