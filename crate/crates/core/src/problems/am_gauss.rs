//! Synthetic additive-manufacturing quality model: a sum of 2-D Gaussian
//! bumps over every ordered pair of the 11 stacked inputs (5 situation
//! dimensions followed by 6 parameters).

use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Problem;
use crate::data::{BoundsSpec, Dataset, Example};
use crate::error::{Error, Result};
use crate::linalg::{random_psd_2x2, Psd2x2};
use crate::seeds::{self, Stream};

pub const DX: usize = 5;
pub const DA: usize = 6;
pub const DIM: usize = DX + DA;
pub const EIG_MAX: f64 = 30.0;

const FORMAT_TAG: &str = "am-gauss-instance 1";

/// One bump `exp(-(d - s)^T P (d - s))` over inputs `(y_j, y_k)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussTerm {
    /// 0-based input indices.
    pub j: usize,
    pub k: usize,
    pub p: Psd2x2,
    pub s: [f64; 2],
}

impl GaussTerm {
    fn offset(&self, y: &[f64]) -> [f64; 2] {
        [y[self.j] - self.s[0], y[self.k] - self.s[1]]
    }

    pub fn value(&self, y: &[f64]) -> f64 {
        (-self.p.quad_form(self.offset(y))).exp()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmGaussInstance {
    pub seed: u64,
    pub terms: Vec<GaussTerm>,
}

impl AmGaussInstance {
    /// Draws `P` then `s` for each ordered pair `(j, k)`, `j != k`, j-major.
    pub fn generate(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut terms = Vec::with_capacity(DIM * (DIM - 1));
        for j in 0..DIM {
            for k in 0..DIM {
                if j == k {
                    continue;
                }
                let p = random_psd_2x2(&mut rng, 0.0, EIG_MAX);
                let s = [rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)];
                terms.push(GaussTerm { j, k, p, s });
            }
        }
        AmGaussInstance { seed, terms }
    }

    /// `y` stacks `x1..x5, a1..a6`.
    pub fn quality(&self, y: &[f64]) -> f64 {
        debug_assert_eq!(y.len(), DIM);
        self.terms.iter().map(|t| t.value(y)).sum()
    }

    pub fn quality_xa(&self, x: &[f64], a: &[f64]) -> f64 {
        self.quality(&stack(x, a))
    }

    /// Analytic gradient with respect to all 11 inputs.
    pub fn gradient(&self, y: &[f64]) -> [f64; DIM] {
        let mut g = [0.0; DIM];
        for t in &self.terms {
            let d = t.offset(y);
            let v = (-t.p.quad_form(d)).exp();
            let pd = t.p.apply(d);
            g[t.j] -= 2.0 * v * pd[0];
            g[t.k] -= 2.0 * v * pd[1];
        }
        g
    }

    pub fn dataset<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Dataset {
        let examples = (0..n)
            .map(|_| {
                let y: Vec<f64> = (0..DIM).map(|_| rng.random_range(-1.0..=1.0)).collect();
                let q = self.quality(&y);
                Example {
                    x: y[..DX].to_vec(),
                    a: y[DX..].to_vec(),
                    q,
                }
            })
            .collect();
        Dataset::new(DX, DA, examples).expect("generated examples are well-formed")
    }

    /// Multi-start projected gradient ascent over `a in [-1, 1]^6`.
    ///
    /// Returns the best parametrization found and its quality.
    pub fn oracle_argmax<R: Rng + ?Sized>(
        &self,
        x: &[f64],
        restarts: usize,
        tol: f64,
        rng: &mut R,
    ) -> (Vec<f64>, f64) {
        assert!(restarts >= 1, "oracle needs at least one start");
        let mut best: (Vec<f64>, f64) = (Vec::new(), f64::NEG_INFINITY);
        for _ in 0..restarts {
            let start: Vec<f64> = (0..DA).map(|_| rng.random_range(-1.0..=1.0)).collect();
            let (a, q) = self.ascend(x, start, tol);
            if q > best.1 {
                best = (a, q);
            }
        }
        best
    }

    fn ascend(&self, x: &[f64], a0: Vec<f64>, tol: f64) -> (Vec<f64>, f64) {
        const MAX_ITER: usize = 2000;
        let mut y = stack(x, &a0);
        let mut q = self.quality(&y);
        let mut step = 0.1;
        for _ in 0..MAX_ITER {
            let grad = self.gradient(&y);
            let mut improved = false;
            while step > 1e-14 {
                let mut cand = y.clone();
                let mut ascent = 0.0;
                for i in DX..DIM {
                    cand[i] = (y[i] + step * grad[i]).clamp(-1.0, 1.0);
                    ascent += grad[i] * (cand[i] - y[i]);
                }
                if ascent <= 0.0 {
                    // Projected gradient vanishes: a box-constrained stationary point.
                    break;
                }
                let q_new = self.quality(&cand);
                if q_new >= q + 1e-4 * ascent {
                    let moved = cand[DX..]
                        .iter()
                        .zip(&y[DX..])
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max);
                    let gain = q_new - q;
                    y = cand;
                    q = q_new;
                    improved = true;
                    step *= 2.0;
                    if gain < tol && moved < tol {
                        return (y[DX..].to_vec(), q);
                    }
                    break;
                }
                step *= 0.5;
            }
            if !improved {
                break;
            }
        }
        (y[DX..].to_vec(), q)
    }

    /// One header line, then `j k p00 p01 p10 p11 s1 s2` per term with
    /// 1-based indices and 17 significant digits.
    pub fn to_text(&self) -> String {
        let mut out = format!("{FORMAT_TAG}\nseed {}\nterms {}\n", self.seed, self.terms.len());
        for t in &self.terms {
            let m = &t.p.m;
            writeln!(
                out,
                "{} {} {:.16e} {:.16e} {:.16e} {:.16e} {:.16e} {:.16e}",
                t.j + 1,
                t.k + 1,
                m[0][0],
                m[0][1],
                m[1][0],
                m[1][1],
                t.s[0],
                t.s[1]
            )
            .unwrap();
        }
        out
    }

    pub fn parse_text(text: &str, source_name: &str) -> Result<Self> {
        let err = |offset: usize, message: String| Error::Parse {
            source_name: source_name.to_string(),
            offset,
            message,
        };
        let mut offset = 0;
        let mut lines = text.split_inclusive('\n').map(|l| {
            let start = offset;
            offset += l.len();
            (start, l.trim_end())
        });
        let mut next = |what: &str| lines.next().ok_or_else(|| err(text.len(), format!("missing {what}")));

        let (at, tag) = next("format tag")?;
        if tag != FORMAT_TAG {
            return Err(err(at, format!("expected `{FORMAT_TAG}`")));
        }
        let (at, seed_line) = next("seed line")?;
        let seed = seed_line
            .strip_prefix("seed ")
            .and_then(|v| v.parse::<u64>().ok())
            .ok_or_else(|| err(at, "expected `seed <u64>`".into()))?;
        let (at, count_line) = next("term count")?;
        let count = count_line
            .strip_prefix("terms ")
            .and_then(|v| v.parse::<usize>().ok())
            .ok_or_else(|| err(at, "expected `terms <count>`".into()))?;
        let mut terms = Vec::with_capacity(count);
        for _ in 0..count {
            let (at, line) = next("term line")?;
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 8 {
                return Err(err(at, format!("expected 8 fields, got {}", fields.len())));
            }
            let idx = |f: &str| -> Result<usize> {
                match f.parse::<usize>() {
                    Ok(v) if (1..=DIM).contains(&v) => Ok(v - 1),
                    _ => Err(err(at, format!("bad input index `{f}`"))),
                }
            };
            let num = |f: &str| -> Result<f64> {
                f.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| err(at, format!("bad number `{f}`")))
            };
            terms.push(GaussTerm {
                j: idx(fields[0])?,
                k: idx(fields[1])?,
                p: Psd2x2 {
                    m: [[num(fields[2])?, num(fields[3])?], [num(fields[4])?, num(fields[5])?]],
                },
                s: [num(fields[6])?, num(fields[7])?],
            });
        }
        Ok(AmGaussInstance { seed, terms })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        crate::harness::write_atomic(path, self.to_text().as_bytes())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_text(&text, &path.display().to_string())
    }
}

fn stack(x: &[f64], a: &[f64]) -> Vec<f64> {
    let mut y = Vec::with_capacity(x.len() + a.len());
    y.extend_from_slice(x);
    y.extend_from_slice(a);
    y
}

/// An instance plus the oracle settings used as ground truth.
#[derive(Debug, Clone)]
pub struct AmGaussProblem {
    pub instance: AmGaussInstance,
    pub restarts: usize,
    pub tol: f64,
}

impl AmGaussProblem {
    pub fn new(instance: AmGaussInstance) -> Self {
        AmGaussProblem {
            instance,
            restarts: 64,
            tol: 1e-8,
        }
    }
}

impl Problem for AmGaussProblem {
    fn dx(&self) -> usize {
        DX
    }

    fn da(&self) -> usize {
        DA
    }

    fn bounds(&self) -> BoundsSpec {
        BoundsSpec::uniform(DX, DA, -1.0, 1.0).expect("valid bounds")
    }

    fn quality(&self, x: &[f64], a: &[f64]) -> f64 {
        self.instance.quality_xa(x, a)
    }

    /// Start points depend only on the instance seed and `x`.
    fn optimum(&self, x: &[f64]) -> (Vec<f64>, f64) {
        let key = x
            .iter()
            .fold(0u64, |acc, v| seeds::derive(acc, Stream::Oracle, v.to_bits()));
        let mut rng = seeds::rng(self.instance.seed, Stream::Oracle, key);
        self.instance.oracle_argmax(x, self.restarts, self.tol, &mut rng)
    }
}
