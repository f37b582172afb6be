//! The frog problem: one situation and one action in `[0, 1]`, tent-shaped
//! payoff peaking where `x + a = 1`.

use rand::Rng;

use super::Problem;
use crate::data::{denormalize, BoundsSpec, Dataset, Example};

pub fn quality(x: f64, a: f64) -> f64 {
    let s = x + a;
    if s <= 1.0 {
        s
    } else {
        2.0 - s
    }
}

pub fn optimal(x: f64) -> f64 {
    1.0 - x
}

fn to_norm(v: f64) -> f64 {
    2.0 * v - 1.0
}

fn to_native(v: f64) -> f64 {
    (v + 1.0) / 2.0
}

/// `n` uniform native samples, normalized to `[-1, 1]`; `q` stays native.
pub fn dataset<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Dataset {
    let examples = (0..n)
        .map(|_| {
            let x: f64 = rng.random_range(0.0..=1.0);
            let a: f64 = rng.random_range(0.0..=1.0);
            Example {
                x: vec![to_norm(x)],
                a: vec![to_norm(a)],
                q: quality(x, a),
            }
        })
        .collect();
    Dataset::new(1, 1, examples).expect("frog examples are well-formed")
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Frog;

impl Problem for Frog {
    fn dx(&self) -> usize {
        1
    }

    fn da(&self) -> usize {
        1
    }

    fn bounds(&self) -> BoundsSpec {
        BoundsSpec::uniform(1, 1, 0.0, 1.0).expect("valid bounds")
    }

    fn quality(&self, x: &[f64], a: &[f64]) -> f64 {
        let b = self.bounds();
        let x = denormalize(x, &b.situation).expect("normalized situation")[0];
        let a = denormalize(a, &b.parametrization).expect("normalized action")[0];
        quality(x, a)
    }

    fn optimum(&self, x: &[f64]) -> (Vec<f64>, f64) {
        let native = to_native(x[0]);
        let a = optimal(native);
        (vec![to_norm(a)], quality(native, a))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn payoff_examples() {
        assert!((quality(0.3, 0.4) - 0.7).abs() < 1e-15);
        assert_eq!(quality(0.5, 0.5), 1.0);
        assert!((quality(0.8, 0.6) - 0.6).abs() < 1e-15);
    }

    #[test]
    fn optimum_examples() {
        assert!((optimal(0.3) - 0.7).abs() < 1e-15);
        assert_eq!(optimal(1.0), 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..100 {
            let x: f64 = rng.random_range(0.0..=1.0);
            assert_eq!(quality(x, optimal(x)), 1.0);
        }
    }

    #[test]
    fn symmetric_and_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let x: f64 = rng.random_range(0.0..=1.0);
            let a: f64 = rng.random_range(0.0..=1.0);
            assert_eq!(quality(x, a), quality(a, x));
            assert!((0.0..=1.0).contains(&quality(x, a)));
        }
    }

    #[test]
    fn dataset_ranges_and_determinism() {
        let d = dataset(100, &mut ChaCha8Rng::seed_from_u64(7));
        assert_eq!(d.len(), 100);
        for e in d.iter() {
            assert!((-1.0..=1.0).contains(&e.x[0]));
            assert!((-1.0..=1.0).contains(&e.a[0]));
            assert!((0.0..=1.0).contains(&e.q));
        }
        let again = dataset(100, &mut ChaCha8Rng::seed_from_u64(7));
        assert_eq!(d.to_csv(), again.to_csv());
    }

    #[test]
    fn dense_sampling_nearly_attains_peak() {
        let d = dataset(100_000, &mut ChaCha8Rng::seed_from_u64(3));
        let max = d.iter().map(|e| e.q).fold(f64::MIN, f64::max);
        assert!(max >= 0.99);
    }

    #[test]
    fn problem_view_agrees_with_native() {
        let (a, q) = Frog.optimum(&[to_norm(0.2)]);
        assert!((to_native(a[0]) - 0.8).abs() < 1e-15);
        assert_eq!(q, 1.0);
        assert!((Frog.quality(&[to_norm(0.2)], &[to_norm(0.2)]) - 0.4).abs() < 1e-15);
    }
}
