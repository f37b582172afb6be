//! Least-squares fitting and random PSD matrices.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_RIDGE_EPSILON: f64 = 1e-9;

/// Dense row-major feature matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DesignMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if cols == 0 {
            return Err(Error::Config("design matrix needs at least one column".into()));
        }
        if data.len() != rows * cols {
            return Err(Error::Dimension {
                expected: rows * cols,
                got: data.len(),
                context: "design matrix storage",
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("design matrix has non-finite entries".into()));
        }
        Ok(DesignMatrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let data = rows.iter().flatten().copied().collect();
        Self::new(rows.len(), cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OlsFit {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
}

/// Least squares with an unpenalized intercept.
///
/// The intercept is eliminated by centering; the centered normal equations
/// are solved by Cholesky. Rank-deficient systems (including `n < p + 1`)
/// are solved with `ridge_epsilon` added to the diagonal.
pub fn ols_fit(x: &DesignMatrix, y: &[f64], ridge_epsilon: f64) -> Result<OlsFit> {
    let (n, p) = (x.rows, x.cols);
    if n == 0 {
        return Err(Error::EmptyData("ols_fit on zero rows"));
    }
    if y.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: y.len(),
            context: "ols targets",
        });
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::Config("non-finite ols target".into()));
    }

    let inv_n = 1.0 / n as f64;
    let mut x_mean = vec![0.0; p];
    for i in 0..n {
        for (m, v) in x_mean.iter_mut().zip(x.row(i)) {
            *m += v;
        }
    }
    x_mean.iter_mut().for_each(|m| *m *= inv_n);
    let y_mean = y.iter().sum::<f64>() * inv_n;

    // Upper triangle of the centered Gram matrix, plus right-hand side.
    let mut gram = vec![0.0; p * p];
    let mut rhs = vec![0.0; p];
    let mut centered = vec![0.0; p];
    for i in 0..n {
        for ((c, v), m) in centered.iter_mut().zip(x.row(i)).zip(&x_mean) {
            *c = v - m;
        }
        let yc = y[i] - y_mean;
        for j in 0..p {
            let cj = centered[j];
            if cj == 0.0 {
                continue;
            }
            rhs[j] += cj * yc;
            let row = &mut gram[j * p..(j + 1) * p];
            for k in j..p {
                row[k] += cj * centered[k];
            }
        }
    }
    for j in 0..p {
        for k in 0..j {
            gram[j * p + k] = gram[k * p + j];
        }
    }

    let max_diag = (0..p).map(|j| gram[j * p + j]).fold(0.0, f64::max);
    let mut coefficients = if n > p {
        cholesky_solve(&gram, &rhs, p, 0.0, max_diag)
    } else {
        None
    };
    let mut eps = ridge_epsilon;
    while coefficients.is_none() {
        coefficients = cholesky_solve(&gram, &rhs, p, eps, max_diag);
        eps = (eps * 10.0).max(1e-12 * max_diag).max(f64::MIN_POSITIVE);
    }
    let coefficients = coefficients.expect("loop exits with a solution");
    let intercept = y_mean
        - coefficients
            .iter()
            .zip(&x_mean)
            .map(|(w, m)| w * m)
            .sum::<f64>();
    Ok(OlsFit {
        intercept,
        coefficients,
    })
}

/// Solves `(A + ridge I) w = b`; `None` when a pivot is not safely positive.
fn cholesky_solve(a: &[f64], b: &[f64], p: usize, ridge: f64, max_diag: f64) -> Option<Vec<f64>> {
    let tiny = 1e-10 * max_diag.max(ridge);
    let mut l = vec![0.0; p * p];
    for j in 0..p {
        let mut d = a[j * p + j] + ridge;
        for k in 0..j {
            d -= l[j * p + k] * l[j * p + k];
        }
        if !(d > tiny) || d <= 0.0 {
            return None;
        }
        let d = d.sqrt();
        l[j * p + j] = d;
        for i in j + 1..p {
            let mut s = a[i * p + j];
            for k in 0..j {
                s -= l[i * p + k] * l[j * p + k];
            }
            l[i * p + j] = s / d;
        }
    }
    let mut z = vec![0.0; p];
    for i in 0..p {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * p + k] * z[k];
        }
        z[i] = s / l[i * p + i];
    }
    let mut w = vec![0.0; p];
    for i in (0..p).rev() {
        let mut s = z[i];
        for k in i + 1..p {
            s -= l[k * p + i] * w[k];
        }
        w[i] = s / l[i * p + i];
    }
    w.iter().all(|v| v.is_finite()).then_some(w)
}

/// Symmetric positive semi-definite 2x2 matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Psd2x2 {
    pub m: [[f64; 2]; 2],
}

impl Psd2x2 {
    pub const ZERO: Psd2x2 = Psd2x2 { m: [[0.0; 2]; 2] };

    /// `R(theta) diag(l1, l2) R(theta)^T`.
    pub fn from_eigen(l1: f64, l2: f64, theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        let m00 = c * c * l1 + s * s * l2;
        let m11 = s * s * l1 + c * c * l2;
        let m01 = c * s * (l1 - l2);
        Psd2x2 {
            m: [[m00, m01], [m01, m11]],
        }
    }

    /// `v^T M v`.
    pub fn quad_form(&self, v: [f64; 2]) -> f64 {
        let m = &self.m;
        v[0] * (m[0][0] * v[0] + m[0][1] * v[1]) + v[1] * (m[1][0] * v[0] + m[1][1] * v[1])
    }

    /// `M v`.
    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        let m = &self.m;
        [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
    }
}

/// Draws eigenvalues uniformly in `[eig_low, eig_high]` (first, then second)
/// and a rotation angle uniformly in `[0, 2pi)`.
pub fn random_psd_2x2<R: Rng + ?Sized>(rng: &mut R, eig_low: f64, eig_high: f64) -> Psd2x2 {
    assert!(
        0.0 <= eig_low && eig_low <= eig_high,
        "eigenvalue range must satisfy 0 <= low <= high"
    );
    let mut eig = || {
        if eig_low == eig_high {
            eig_low
        } else {
            rng.random_range(eig_low..=eig_high)
        }
    };
    let l1 = eig();
    let l2 = eig();
    let theta = rng.random_range(0.0..std::f64::consts::TAU);
    Psd2x2::from_eigen(l1, l2, theta)
}
