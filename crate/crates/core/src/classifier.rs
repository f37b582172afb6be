//! Interval-conditioned local quadratic models.

use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{ols_fit, DesignMatrix, DEFAULT_RIDGE_EPSILON};

/// Error assigned to classifiers that match no training example.
pub const UNFITTED_ERROR: f64 = f64::MAX;

/// Closed hyperrectangle over situation space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalCondition {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl IntervalCondition {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::Dimension {
                expected: lower.len(),
                got: upper.len(),
                context: "interval bounds",
            });
        }
        for (i, (&l, &u)) in lower.iter().zip(&upper).enumerate() {
            if !(-1.0 <= l && l <= u && u <= 1.0) {
                return Err(Error::OutOfRange {
                    what: "interval bound",
                    dim: i,
                    value: if l > u { l } else { u.max(-l) },
                    low: -1.0,
                    high: 1.0,
                });
            }
        }
        Ok(IntervalCondition { lower, upper })
    }

    pub fn full(dx: usize) -> Self {
        IntervalCondition {
            lower: vec![-1.0; dx],
            upper: vec![1.0; dx],
        }
    }

    /// Per dimension: two uniform draws in `[-1, 1]`, smaller one is the lower bound.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, dx: usize) -> Self {
        let mut lower = Vec::with_capacity(dx);
        let mut upper = Vec::with_capacity(dx);
        for _ in 0..dx {
            let b1: f64 = rng.random_range(-1.0..=1.0);
            let b2: f64 = rng.random_range(-1.0..=1.0);
            lower.push(b1.min(b2));
            upper.push(b1.max(b2));
        }
        IntervalCondition { lower, upper }
    }

    pub fn dx(&self) -> usize {
        self.lower.len()
    }

    #[inline]
    pub fn contains(&self, x: &[f64]) -> bool {
        self.lower
            .iter()
            .zip(&self.upper)
            .zip(x)
            .all(|((l, u), v)| l <= v && v <= u)
    }

    pub fn is_legal(&self) -> bool {
        self.lower
            .iter()
            .zip(&self.upper)
            .all(|(&l, &u)| -1.0 <= l && l <= u && u <= 1.0)
    }
}

pub fn feature_len(dx: usize, da: usize, include_linear: bool) -> usize {
    let base = dx * (dx + 1) / 2 + dx * da + da;
    if include_linear {
        base + dx + da
    } else {
        base
    }
}

/// Quadratic feature vector: `x_i x_j` (i <= j), `x_i a_k` (i-major), `a_k^2`,
/// then optionally `x_i` and `a_k`.
pub fn build_features(x: &[f64], a: &[f64], include_linear: bool) -> Vec<f64> {
    let mut out = Vec::with_capacity(feature_len(x.len(), a.len(), include_linear));
    push_features(&mut out, x, a, include_linear);
    out
}

fn push_features(out: &mut Vec<f64>, x: &[f64], a: &[f64], include_linear: bool) {
    for i in 0..x.len() {
        for j in i..x.len() {
            out.push(x[i] * x[j]);
        }
    }
    for &xi in x {
        for &ak in a {
            out.push(xi * ak);
        }
    }
    out.extend(a.iter().map(|v| v * v));
    if include_linear {
        out.extend_from_slice(x);
        out.extend_from_slice(a);
    }
}

/// Coefficients of a fitted local model, grouped by feature block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalModel {
    pub intercept: f64,
    /// Upper triangle of `x_i x_j`, row-major over `i <= j`.
    pub w_xx: Vec<f64>,
    /// `x_i a_k`, index `i * da + k`.
    pub w_xa: Vec<f64>,
    pub w_aa: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w_x: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w_a: Option<Vec<f64>>,
}

impl LocalModel {
    pub fn zeros(dx: usize, da: usize, include_linear: bool) -> Self {
        LocalModel {
            intercept: 0.0,
            w_xx: vec![0.0; dx * (dx + 1) / 2],
            w_xa: vec![0.0; dx * da],
            w_aa: vec![0.0; da],
            w_x: include_linear.then(|| vec![0.0; dx]),
            w_a: include_linear.then(|| vec![0.0; da]),
        }
    }

    fn from_flat(dx: usize, da: usize, include_linear: bool, intercept: f64, w: &[f64]) -> Self {
        let (n_xx, n_xa) = (dx * (dx + 1) / 2, dx * da);
        let mut rest = w;
        let mut take = |n: usize| {
            let (head, tail) = rest.split_at(n);
            rest = tail;
            head.to_vec()
        };
        let w_xx = take(n_xx);
        let w_xa = take(n_xa);
        let w_aa = take(da);
        let (w_x, w_a) = if include_linear {
            (Some(take(dx)), Some(take(da)))
        } else {
            (None, None)
        };
        LocalModel {
            intercept,
            w_xx,
            w_xa,
            w_aa,
            w_x,
            w_a,
        }
    }

    pub fn da(&self) -> usize {
        self.w_aa.len()
    }

    pub fn dx(&self) -> usize {
        if self.w_aa.is_empty() {
            0
        } else {
            self.w_xa.len() / self.w_aa.len()
        }
    }

    pub fn has_linear(&self) -> bool {
        self.w_x.is_some()
    }

    pub fn coefficients(&self) -> impl Iterator<Item = f64> + '_ {
        std::iter::once(self.intercept)
            .chain(self.w_xx.iter().copied())
            .chain(self.w_xa.iter().copied())
            .chain(self.w_aa.iter().copied())
            .chain(self.w_x.iter().flatten().copied())
            .chain(self.w_a.iter().flatten().copied())
    }

    pub fn predict(&self, x: &[f64], a: &[f64]) -> f64 {
        let da = a.len();
        let mut q = self.intercept;
        let mut idx = 0;
        for i in 0..x.len() {
            for j in i..x.len() {
                q += self.w_xx[idx] * x[i] * x[j];
                idx += 1;
            }
        }
        for (i, xi) in x.iter().enumerate() {
            let row = &self.w_xa[i * da..(i + 1) * da];
            q += xi * row.iter().zip(a).map(|(w, ak)| w * ak).sum::<f64>();
        }
        q += self.w_aa.iter().zip(a).map(|(w, ak)| w * ak * ak).sum::<f64>();
        if let (Some(wx), Some(wa)) = (&self.w_x, &self.w_a) {
            q += wx.iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
            q += wa.iter().zip(a).map(|(w, v)| w * v).sum::<f64>();
        }
        q
    }

    /// Maximizer of the model over `a in [-1, 1]^Da` at fixed `x`.
    ///
    /// The model has no `a_j a_k` cross terms, so each dimension is
    /// maximized on its own. Ties prefer `+1`; a flat zero slope yields `0`.
    pub fn argmax(&self, x: &[f64]) -> Vec<f64> {
        let da = self.da();
        (0..da)
            .map(|k| {
                let mut slope: f64 = x
                    .iter()
                    .enumerate()
                    .map(|(i, xi)| self.w_xa[i * da + k] * xi)
                    .sum();
                if let Some(wa) = &self.w_a {
                    slope += wa[k];
                }
                let curvature = self.w_aa[k];
                if curvature < 0.0 {
                    (-slope / (2.0 * curvature)).clamp(-1.0, 1.0)
                } else if curvature > 0.0 {
                    // u + s vs u - s at a = +1 / -1.
                    if slope >= 0.0 {
                        1.0
                    } else {
                        -1.0
                    }
                } else if slope > 0.0 {
                    1.0
                } else if slope < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            })
            .collect()
    }
}

/// One rule: a condition, a local model and its training error.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Classifier {
    pub condition: IntervalCondition,
    pub model: Option<LocalModel>,
    pub train_error: f64,
    pub experience: usize,
    /// Indices of the training examples the current model was fitted on.
    #[serde(skip)]
    matched: Vec<u32>,
}

impl PartialEq for Classifier {
    fn eq(&self, other: &Self) -> bool {
        self.condition == other.condition
            && self.model == other.model
            && self.train_error.to_bits() == other.train_error.to_bits()
            && self.experience == other.experience
    }
}

impl Classifier {
    pub fn unfitted(condition: IntervalCondition) -> Self {
        Classifier {
            condition,
            model: None,
            train_error: UNFITTED_ERROR,
            experience: 0,
            matched: Vec::new(),
        }
    }

    pub fn with_model(condition: IntervalCondition, model: LocalModel, train_error: f64, experience: usize) -> Self {
        Classifier {
            condition,
            model: Some(model),
            train_error,
            experience,
            matched: Vec::new(),
        }
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R, dx: usize) -> Self {
        Self::unfitted(IntervalCondition::random(rng, dx))
    }

    pub fn is_fitted(&self) -> bool {
        self.model.is_some()
    }

    pub fn matches(&self, x: &[f64]) -> Result<bool> {
        if x.len() != self.condition.dx() {
            return Err(Error::Dimension {
                expected: self.condition.dx(),
                got: x.len(),
                context: "situation vs condition",
            });
        }
        Ok(self.condition.contains(x))
    }

    /// Fits the local model on all training examples the condition matches.
    pub fn fit(&mut self, train: &Dataset, include_linear: bool) {
        let matched = self.matching_indices(train);
        self.fit_on(train, matched, include_linear);
    }

    /// Like [`Classifier::fit`], but skips the regression when the matched
    /// example set is unchanged since the last fit on the same data.
    pub fn refit(&mut self, train: &Dataset, include_linear: bool) {
        let matched = self.matching_indices(train);
        let same_model_kind = match &self.model {
            Some(m) => m.has_linear() == include_linear,
            None => true,
        };
        if matched == self.matched && same_model_kind && matched.len() == self.experience {
            return;
        }
        self.fit_on(train, matched, include_linear);
    }

    fn matching_indices(&self, train: &Dataset) -> Vec<u32> {
        train
            .iter()
            .enumerate()
            .filter(|(_, e)| self.condition.contains(&e.x))
            .map(|(i, _)| i as u32)
            .collect()
    }

    fn fit_on(&mut self, train: &Dataset, matched: Vec<u32>, include_linear: bool) {
        let (dx, da) = (train.dx(), train.da());
        self.experience = matched.len();
        if matched.is_empty() {
            self.model = None;
            self.train_error = UNFITTED_ERROR;
            self.matched = matched;
            return;
        }
        let p = feature_len(dx, da, include_linear);
        let mut storage = Vec::with_capacity(matched.len() * p);
        let mut y = Vec::with_capacity(matched.len());
        for &i in &matched {
            let e = &train.examples()[i as usize];
            push_features(&mut storage, &e.x, &e.a, include_linear);
            y.push(e.q);
        }
        let design = DesignMatrix::new(matched.len(), p, storage)
            .expect("features of validated examples are finite");
        let fit = ols_fit(&design, &y, DEFAULT_RIDGE_EPSILON).expect("non-empty fit");
        let model = LocalModel::from_flat(dx, da, include_linear, fit.intercept, &fit.coefficients);
        let sse: f64 = matched
            .iter()
            .map(|&i| {
                let e = &train.examples()[i as usize];
                let r = e.q - model.predict(&e.x, &e.a);
                r * r
            })
            .sum();
        self.train_error = sse / matched.len() as f64;
        self.model = Some(model);
        self.matched = matched;
    }

    pub fn local_predict(&self, x: &[f64], a: &[f64]) -> Result<f64> {
        self.model
            .as_ref()
            .map(|m| m.predict(x, a))
            .ok_or(Error::Usage("prediction from an unfitted classifier"))
    }

    pub fn local_argmax(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.model
            .as_ref()
            .map(|m| m.argmax(x))
            .ok_or(Error::Usage("argmax of an unfitted classifier"))
    }

    /// `IF x1 ∈ [l,u] AND ... THEN q ≈ <polynomial> (MSE=..., n=...)`.
    pub fn render(&self) -> String {
        let mut out = String::from("IF ");
        let conds: Vec<String> = self
            .condition
            .lower
            .iter()
            .zip(&self.condition.upper)
            .enumerate()
            .map(|(i, (l, u))| format!("x{} ∈ [{}, {}]", i + 1, sig4(*l), sig4(*u)))
            .collect();
        out.push_str(&conds.join(" AND "));
        out.push_str(" THEN q ≈ ");
        match &self.model {
            None => out.push_str("<unfitted>"),
            Some(m) => out.push_str(&render_polynomial(m)),
        }
        let mse = if self.is_fitted() {
            sig4(self.train_error)
        } else {
            "inf".into()
        };
        write!(out, " (MSE={mse}, n={})", self.experience).unwrap();
        out
    }
}

fn render_polynomial(m: &LocalModel) -> String {
    let (dx, da) = (m.dx(), m.da());
    let mut terms: Vec<(f64, String)> = Vec::new();
    let mut idx = 0;
    for i in 0..dx {
        for j in i..dx {
            let name = if i == j {
                format!("x{}^2", i + 1)
            } else {
                format!("x{}*x{}", i + 1, j + 1)
            };
            terms.push((m.w_xx[idx], name));
            idx += 1;
        }
    }
    for i in 0..dx {
        for k in 0..da {
            terms.push((m.w_xa[i * da + k], format!("x{}*a{}", i + 1, k + 1)));
        }
    }
    for k in 0..da {
        terms.push((m.w_aa[k], format!("a{}^2", k + 1)));
    }
    if let (Some(wx), Some(wa)) = (&m.w_x, &m.w_a) {
        for (i, w) in wx.iter().enumerate() {
            terms.push((*w, format!("x{}", i + 1)));
        }
        for (k, w) in wa.iter().enumerate() {
            terms.push((*w, format!("a{}", k + 1)));
        }
    }
    let mut out = sig4(m.intercept);
    for (w, name) in terms {
        let sign = if w.is_sign_negative() { '-' } else { '+' };
        write!(out, " {sign} {}*{name}", sig4(w.abs())).unwrap();
    }
    out
}

/// Formats with four significant digits.
pub fn sig4(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let mag = v.abs().log10().floor() as i32;
    if (-3..5).contains(&mag) {
        let decimals = (3 - mag).max(0) as usize;
        format!("{v:.decimals$}")
    } else {
        format!("{v:.3e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Example;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cond(lower: &[f64], upper: &[f64]) -> IntervalCondition {
        IntervalCondition::new(lower.to_vec(), upper.to_vec()).unwrap()
    }

    fn model_1d(intercept: f64, w_xx: f64, w_xa: f64, w_aa: f64) -> LocalModel {
        LocalModel {
            intercept,
            w_xx: vec![w_xx],
            w_xa: vec![w_xa],
            w_aa: vec![w_aa],
            w_x: None,
            w_a: None,
        }
    }

    #[test]
    fn matching_examples() {
        let c = Classifier::unfitted(IntervalCondition::full(1));
        assert!(c.matches(&[0.3]).unwrap());
        let c = Classifier::unfitted(cond(&[0.0], &[0.5]));
        assert!(c.matches(&[0.5]).unwrap());
        let c = Classifier::unfitted(cond(&[0.2, -1.0], &[0.4, 0.0]));
        assert!(!c.matches(&[0.3, 0.5]).unwrap());
        assert!(matches!(c.matches(&[0.3]), Err(Error::Dimension { .. })));
    }

    #[test]
    fn condition_rejects_inverted_bounds() {
        assert!(IntervalCondition::new(vec![0.5], vec![0.4]).is_err());
        assert!(IntervalCondition::new(vec![-1.5], vec![0.4]).is_err());
    }

    #[test]
    fn feature_examples() {
        let f = build_features(&[0.5], &[0.2], false);
        let expected = [0.25, 0.10, 0.04];
        for (a, b) in f.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(feature_len(2, 1, false), 6);
        assert_eq!(build_features(&[0.1, 0.2], &[0.3], false).len(), 6);
        assert_eq!(build_features(&[0.1, 0.2], &[0.3], true).len(), 9);
        assert!(build_features(&[0.0, 0.0], &[0.0, 0.0], false)
            .iter()
            .all(|v| *v == 0.0));
    }

    #[test]
    fn feature_order() {
        let f = build_features(&[2.0, 3.0], &[5.0, 7.0], true);
        assert_eq!(
            f,
            vec![4.0, 6.0, 9.0, 10.0, 14.0, 15.0, 21.0, 25.0, 49.0, 2.0, 3.0, 5.0, 7.0]
        );
    }

    #[test]
    fn predict_matches_feature_dot_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for include_linear in [false, true] {
            let (dx, da) = (3, 2);
            let p = feature_len(dx, da, include_linear);
            let w: Vec<f64> = (0..p).map(|_| rng.random_range(-1.0..1.0)).collect();
            let m = LocalModel::from_flat(dx, da, include_linear, 0.7, &w);
            let x = [0.1, -0.4, 0.9];
            let a = [0.3, -0.8];
            let f = build_features(&x, &a, include_linear);
            let dot: f64 = 0.7 + f.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>();
            assert!((m.predict(&x, &a) - dot).abs() < 1e-12);
        }
    }

    #[test]
    fn fit_interpolates_exact_data() {
        // q = 1 + 2 x^2 - x a + 0.5 a^2 on three points.
        let truth = model_1d(1.0, 2.0, -1.0, 0.5);
        let pts = [(0.1, 0.2), (-0.5, 0.7), (0.9, -0.3)];
        let ex = pts
            .iter()
            .map(|&(x, a)| Example {
                x: vec![x],
                a: vec![a],
                q: truth.predict(&[x], &[a]),
            })
            .collect();
        let data = Dataset::new(1, 1, ex).unwrap();
        let mut c = Classifier::unfitted(IntervalCondition::full(1));
        c.fit(&data, false);
        assert!(c.train_error < 1e-12);
        assert_eq!(c.experience, 3);
    }

    #[test]
    fn empty_match_is_unfitted() {
        let data = Dataset::new(
            1,
            1,
            vec![Example {
                x: vec![0.9],
                a: vec![0.0],
                q: 1.0,
            }],
        )
        .unwrap();
        let mut c = Classifier::unfitted(cond(&[-0.5], &[0.5]));
        c.fit(&data, false);
        assert!(!c.is_fitted());
        assert_eq!(c.train_error, UNFITTED_ERROR);
        assert_eq!(c.experience, 0);
        assert!(c.local_predict(&[0.0], &[0.0]).is_err());
        assert!(c.local_argmax(&[0.0]).is_err());
    }

    #[test]
    fn fit_is_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let ex = (0..40)
            .map(|_| {
                let x: f64 = rng.random_range(-1.0..1.0);
                let a: f64 = rng.random_range(-1.0..1.0);
                Example {
                    x: vec![x],
                    a: vec![a],
                    q: (x * a).sin() + a,
                }
            })
            .collect();
        let data = Dataset::new(1, 1, ex).unwrap();
        let mut c1 = Classifier::unfitted(cond(&[-0.6], &[0.8]));
        let mut c2 = c1.clone();
        c1.fit(&data, false);
        c2.fit(&data, false);
        c2.fit(&data, false);
        assert_eq!(c1, c2);
        let before = c1.clone();
        c1.refit(&data, false);
        assert_eq!(before, c1);
    }

    #[test]
    fn local_predict_examples() {
        let c = Classifier::with_model(IntervalCondition::full(1), model_1d(1.7, 0.0, 0.0, 0.0), 0.0, 1);
        assert_eq!(c.local_predict(&[0.3], &[-0.9]).unwrap(), 1.7);
        let c = Classifier::with_model(IntervalCondition::full(1), model_1d(0.0, 0.0, 0.0, -1.0), 0.0, 1);
        assert_eq!(c.local_predict(&[0.2], &[0.5]).unwrap(), -0.25);
    }

    fn grid_argmax(m: &LocalModel, x: &[f64]) -> (f64, f64) {
        let mut best = (f64::NEG_INFINITY, 0.0);
        for i in 0..=20_000 {
            let a = -1.0 + i as f64 * 1e-4;
            let q = m.predict(x, &[a]);
            if q > best.0 {
                best = (q, a);
            }
        }
        best
    }

    #[test]
    fn argmax_examples() {
        let m = model_1d(0.0, 0.0, 0.4, -1.0);
        let a = m.argmax(&[0.5]);
        assert!((a[0] - 0.1).abs() < 1e-12);
        let (_, grid_a) = grid_argmax(&m, &[0.5]);
        assert!((grid_a - 0.1).abs() < 1e-4);

        let m = model_1d(0.0, 0.0, 0.0, 1.0);
        assert_eq!(m.argmax(&[0.3]), vec![1.0]);

        let m = model_1d(0.0, 0.0, 4.0, -1.0);
        assert_eq!(m.argmax(&[1.0]), vec![1.0]);
        let (_, grid_a) = grid_argmax(&m, &[1.0]);
        assert!((grid_a - 1.0).abs() < 1e-9);

        let m = model_1d(0.0, 0.0, 0.0, 0.0);
        assert_eq!(m.argmax(&[0.3]), vec![0.0]);
        let m = model_1d(0.0, 0.0, -2.0, 0.0);
        assert_eq!(m.argmax(&[0.3]), vec![-1.0]);
    }

    #[test]
    fn widening_never_shrinks_match_set() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let xs: Vec<Vec<f64>> = (0..200)
            .map(|_| (0..3).map(|_| rng.random_range(-1.0..=1.0)).collect())
            .collect();
        for _ in 0..100 {
            let narrow = IntervalCondition::random(&mut rng, 3);
            let mut wide = narrow.clone();
            for d in 0..3 {
                wide.lower[d] = (wide.lower[d] - rng.random_range(0.0..0.5)).max(-1.0);
                wide.upper[d] = (wide.upper[d] + rng.random_range(0.0..0.5)).min(1.0);
            }
            for x in &xs {
                if narrow.contains(x) {
                    assert!(wide.contains(x));
                }
            }
        }
    }

    #[test]
    fn rendering() {
        let c = Classifier::with_model(cond(&[-0.5], &[0.25]), model_1d(1.0, -0.123456, 2.0, 0.0), 0.01, 7);
        assert_eq!(
            c.render(),
            "IF x1 ∈ [-0.5000, 0.2500] THEN q ≈ 1.000 - 0.1235*x1^2 + 2.000*x1*a1 + 0*a1^2 (MSE=0.01000, n=7)"
        );
        assert_eq!(sig4(123456.0), "1.235e5");
        assert_eq!(sig4(0.0001234), "1.234e-4");
    }
}
