//! Examples, datasets, bounds and normalization.
//!
//! Situations and parametrizations are stored in normalized units
//! (`[-1, 1]` per component). Quality values stay in problem units.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Inclusive range of one raw dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bound {
    pub low: f64,
    pub high: f64,
}

impl Bound {
    pub fn new(low: f64, high: f64) -> Result<Self> {
        if !(low < high) || !low.is_finite() || !high.is_finite() {
            return Err(Error::Config(format!(
                "bound requires finite low < high, got ({low}, {high})"
            )));
        }
        Ok(Bound { low, high })
    }
}

/// Raw-unit bounds for situations and parametrizations of one problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsSpec {
    pub situation: Vec<Bound>,
    pub parametrization: Vec<Bound>,
}

impl BoundsSpec {
    pub fn uniform(dx: usize, da: usize, low: f64, high: f64) -> Result<Self> {
        let b = Bound::new(low, high)?;
        Ok(BoundsSpec {
            situation: vec![b; dx],
            parametrization: vec![b; da],
        })
    }
}

/// Maps each raw component into `[-1, 1]`.
pub fn normalize(raw: &[f64], bounds: &[Bound]) -> Result<Vec<f64>> {
    check_len(raw.len(), bounds.len())?;
    raw.iter()
        .zip(bounds)
        .enumerate()
        .map(|(i, (&v, b))| {
            if !(b.low..=b.high).contains(&v) {
                return Err(Error::OutOfRange {
                    what: "raw value",
                    dim: i,
                    value: v,
                    low: b.low,
                    high: b.high,
                });
            }
            Ok(2.0 * (v - b.low) / (b.high - b.low) - 1.0)
        })
        .collect()
}

pub fn denormalize(norm: &[f64], bounds: &[Bound]) -> Result<Vec<f64>> {
    check_len(norm.len(), bounds.len())?;
    norm.iter()
        .zip(bounds)
        .enumerate()
        .map(|(i, (&v, b))| {
            if !(-1.0..=1.0).contains(&v) {
                return Err(Error::OutOfRange {
                    what: "normalized value",
                    dim: i,
                    value: v,
                    low: -1.0,
                    high: 1.0,
                });
            }
            Ok(b.low + (v + 1.0) * 0.5 * (b.high - b.low))
        })
        .collect()
}

fn check_len(got: usize, expected: usize) -> Result<()> {
    if got != expected {
        return Err(Error::Dimension {
            expected,
            got,
            context: "vector vs bounds",
        });
    }
    Ok(())
}

/// One observed situation/parametrization pair and its quality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Example {
    pub x: Vec<f64>,
    pub a: Vec<f64>,
    pub q: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    dx: usize,
    da: usize,
    examples: Vec<Example>,
}

impl Dataset {
    pub fn new(dx: usize, da: usize, examples: Vec<Example>) -> Result<Self> {
        if dx == 0 || da == 0 {
            return Err(Error::Config("dx and da must be positive".into()));
        }
        for e in &examples {
            if e.x.len() != dx {
                return Err(Error::Dimension {
                    expected: dx,
                    got: e.x.len(),
                    context: "example situation",
                });
            }
            if e.a.len() != da {
                return Err(Error::Dimension {
                    expected: da,
                    got: e.a.len(),
                    context: "example parametrization",
                });
            }
            if !e.q.is_finite() {
                return Err(Error::Config(format!("non-finite quality {}", e.q)));
            }
        }
        Ok(Dataset { dx, da, examples })
    }

    pub fn dx(&self) -> usize {
        self.dx
    }

    pub fn da(&self) -> usize {
        self.da
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn examples(&self) -> &[Example] {
        &self.examples
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Example> {
        self.examples.iter()
    }

    pub fn qualities(&self) -> Vec<f64> {
        self.examples.iter().map(|e| e.q).collect()
    }

    /// CSV with header `x1..xDx,a1..aDa,q`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let header: Vec<String> = (1..=self.dx)
            .map(|i| format!("x{i}"))
            .chain((1..=self.da).map(|k| format!("a{k}")))
            .chain(std::iter::once("q".to_string()))
            .collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for e in &self.examples {
            let mut first = true;
            for v in e.x.iter().chain(&e.a).chain(std::iter::once(&e.q)) {
                if !first {
                    out.push(',');
                }
                first = false;
                write!(out, "{v:?}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        crate::harness::write_atomic(path, self.to_csv().as_bytes())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::parse_csv(file, &path.display().to_string())
    }

    pub fn parse_csv(reader: impl Read, source_name: &str) -> Result<Self> {
        let parse_err = |offset: usize, message: String| Error::Parse {
            source_name: source_name.to_string(),
            offset,
            message,
        };
        let mut reader = BufReader::new(reader);
        let mut offset = 0usize;
        let mut line = String::new();
        let n = reader
            .read_line(&mut line)
            .map_err(|e| parse_err(0, e.to_string()))?;
        if n == 0 {
            return Err(parse_err(0, "missing header".into()));
        }
        let (dx, da) = parse_header(line.trim_end()).map_err(|m| parse_err(0, m))?;
        offset += n;

        let mut examples = Vec::new();
        loop {
            line.clear();
            let n = reader
                .read_line(&mut line)
                .map_err(|e| parse_err(offset, e.to_string()))?;
            if n == 0 {
                break;
            }
            let row = line.trim_end();
            if row.is_empty() {
                offset += n;
                continue;
            }
            let values: Vec<f64> = row
                .split(',')
                .map(|f| f.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| parse_err(offset, format!("bad number: {e}")))?;
            if values.len() != dx + da + 1 {
                return Err(parse_err(
                    offset,
                    format!("expected {} fields, got {}", dx + da + 1, values.len()),
                ));
            }
            examples.push(Example {
                x: values[..dx].to_vec(),
                a: values[dx..dx + da].to_vec(),
                q: values[dx + da],
            });
            offset += n;
        }
        Dataset::new(dx, da, examples)
    }
}

fn parse_header(header: &str) -> std::result::Result<(usize, usize), String> {
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols.last() != Some(&"q") {
        return Err("last header column must be `q`".into());
    }
    let dx = cols.iter().take_while(|c| c.starts_with('x')).count();
    let da = cols.len() - 1 - dx;
    for (i, c) in cols[..dx].iter().enumerate() {
        if *c != format!("x{}", i + 1) {
            return Err(format!("unexpected header column `{c}`"));
        }
    }
    for (k, c) in cols[dx..dx + da].iter().enumerate() {
        if *c != format!("a{}", k + 1) {
            return Err(format!("unexpected header column `{c}`"));
        }
    }
    if dx == 0 || da == 0 {
        return Err("header needs at least one x and one a column".into());
    }
    Ok((dx, da))
}

/// Randomly partitions `data` into a training and a validation set.
///
/// The validation side receives `floor(fraction * N)` examples.
pub fn split_dataset<R: Rng + ?Sized>(
    data: &Dataset,
    validation_fraction: f64,
    rng: &mut R,
) -> Result<(Dataset, Dataset)> {
    if !(validation_fraction > 0.0 && validation_fraction < 1.0) {
        return Err(Error::Config(format!(
            "validation fraction {validation_fraction} not in (0, 1)"
        )));
    }
    let n = data.len();
    let n_valid = (validation_fraction * n as f64).floor() as usize;
    if n_valid == 0 || n_valid >= n {
        return Err(Error::Config(format!(
            "validation fraction {validation_fraction} on {n} examples leaves an empty side"
        )));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    let pick = |ids: &[usize]| -> Vec<Example> {
        ids.iter().map(|&i| data.examples[i].clone()).collect()
    };
    let valid = pick(&idx[..n_valid]);
    let train = pick(&idx[n_valid..]);
    Ok((
        Dataset::new(data.dx, data.da, train)?,
        Dataset::new(data.dx, data.da, valid)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn b(low: f64, high: f64) -> Bound {
        Bound::new(low, high).unwrap()
    }

    fn toy(n: usize) -> Dataset {
        let ex = (0..n)
            .map(|i| Example {
                x: vec![i as f64 / n as f64],
                a: vec![0.0],
                q: i as f64,
            })
            .collect();
        Dataset::new(1, 1, ex).unwrap()
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize(&[0.5], &[b(0.0, 1.0)]).unwrap(), vec![0.0]);
        assert_eq!(normalize(&[0.0], &[b(0.0, 1.0)]).unwrap(), vec![-1.0]);
        assert_eq!(normalize(&[0.75], &[b(0.5, 1.0)]).unwrap(), vec![0.0]);
        let err = normalize(&[0.1, 2.0], &[b(0.0, 1.0), b(0.0, 1.0)]).unwrap_err();
        assert!(matches!(err, Error::OutOfRange { dim: 1, .. }));
    }

    #[test]
    fn denormalize_examples() {
        assert_eq!(denormalize(&[0.0], &[b(0.0, 1.0)]).unwrap(), vec![0.5]);
        assert_eq!(denormalize(&[1.0], &[b(-3.0, 7.0)]).unwrap(), vec![7.0]);
        assert_eq!(denormalize(&[-0.5], &[b(0.0, 4.0)]).unwrap(), vec![1.0]);
        assert!(denormalize(&[1.5], &[b(0.0, 1.0)]).is_err());
    }

    #[test]
    fn split_sizes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (t, v) = split_dataset(&toy(100), 0.5, &mut rng).unwrap();
        assert_eq!((t.len(), v.len()), (50, 50));
        let (t, v) = split_dataset(&toy(2000), 0.5, &mut rng).unwrap();
        assert_eq!((t.len(), v.len()), (1000, 1000));
        assert!(matches!(
            split_dataset(&toy(10), 0.09, &mut rng),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn split_is_partition_and_deterministic() {
        let data = toy(37);
        let run = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            split_dataset(&data, 0.3, &mut rng).unwrap()
        };
        let (t1, v1) = run(9);
        let (t2, v2) = run(9);
        assert_eq!(t1, t2);
        assert_eq!(v1, v2);
        let mut qs: Vec<f64> = t1.iter().chain(v1.iter()).map(|e| e.q).collect();
        qs.sort_by(f64::total_cmp);
        assert_eq!(qs, data.qualities());
    }

    #[test]
    fn csv_round_trip_and_header() {
        let data = Dataset::new(
            2,
            1,
            vec![Example {
                x: vec![0.1, -0.25],
                a: vec![1.0],
                q: 3.5,
            }],
        )
        .unwrap();
        let text = data.to_csv();
        assert!(text.starts_with("x1,x2,a1,q\n"));
        let back = Dataset::parse_csv(text.as_bytes(), "mem").unwrap();
        assert_eq!(back, data);
    }

    #[test]
    fn csv_errors_carry_offset() {
        let err = Dataset::parse_csv("x1,a1,q\n0.1,0.2,0.3\n0.1,oops,1\n".as_bytes(), "mem")
            .unwrap_err();
        match err {
            Error::Parse { offset, .. } => assert_eq!(offset, 20),
            e => panic!("unexpected {e}"),
        }
    }

    proptest::proptest! {
        #[test]
        fn normalization_round_trip(low in -1e3f64..1e3, width in 1e-3f64..1e3, t in 0.0f64..=1.0) {
            let bound = b(low, low + width);
            let v = low + t * width;
            let back = denormalize(&normalize(&[v], &[bound]).unwrap(), &[bound]).unwrap()[0];
            proptest::prop_assert!((back - v).abs() <= 1e-12 * v.abs().max(1.0));
        }
    }
}
