//! Python bindings: benchmark problems, mixing, model files and training.

use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use suprb::harness::{self, ExperimentConfig, GenDataArgs, ModelFile, ProblemKind};
use suprb::problems::{frog, AmGaussInstance};
use suprb::{Dataset, Error};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn check_len(v: &[f64], n: usize, what: &str) -> PyResult<()> {
    if v.len() != n {
        return Err(PyValueError::new_err(format!("{what}: expected length {n}, got {}", v.len())));
    }
    Ok(())
}

/// Frog payoff in native units.
#[pyfunction]
fn frog_quality(x: f64, a: f64) -> f64 {
    frog::quality(x, a)
}

#[pyfunction]
fn frog_optimal(x: f64) -> f64 {
    frog::optimal(x)
}

/// Normalized mixing weights for a match set's training errors.
#[pyfunction]
fn mix_weights(errors: Vec<f64>) -> PyResult<Vec<f64>> {
    suprb::mixing::mix_weights(&errors).map_err(py_err)
}

/// One AM-Gauss quality function, fully determined by its seed.
#[pyclass(frozen)]
struct AmGauss {
    inner: AmGaussInstance,
}

#[pymethods]
impl AmGauss {
    #[new]
    fn new(seed: u64) -> Self {
        AmGauss {
            inner: AmGaussInstance::generate(seed),
        }
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(AmGauss {
            inner: AmGaussInstance::read(&path).map_err(py_err)?,
        })
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    fn quality(&self, x: Vec<f64>, a: Vec<f64>) -> PyResult<f64> {
        check_len(&x, 5, "x")?;
        check_len(&a, 6, "a")?;
        Ok(self.inner.quality_xa(&x, &a))
    }

    /// Gradient with respect to the stacked `x1..x5, a1..a6`.
    fn gradient(&self, y: Vec<f64>) -> PyResult<Vec<f64>> {
        check_len(&y, 11, "y")?;
        Ok(self.inner.gradient(&y).to_vec())
    }

    #[pyo3(signature = (x, restarts = 64, tol = 1e-8, seed = 0))]
    fn oracle_argmax(&self, x: Vec<f64>, restarts: usize, tol: f64, seed: u64) -> PyResult<(Vec<f64>, f64)> {
        check_len(&x, 5, "x")?;
        if restarts == 0 {
            return Err(PyValueError::new_err("restarts must be positive"));
        }
        Ok(self.inner.oracle_argmax(&x, restarts, tol, &mut ChaCha8Rng::seed_from_u64(seed)))
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }
}

/// A trained rule set read from a model file.
#[pyclass(frozen)]
struct Model {
    inner: ModelFile,
}

#[pymethods]
impl Model {
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Model {
            inner: ModelFile::read(&path).map_err(py_err)?,
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Model {
            inner: ModelFile::from_json(text, "<string>").map_err(py_err)?,
        })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn dx(&self) -> usize {
        self.inner.elitist.dx
    }

    #[getter]
    fn da(&self) -> usize {
        self.inner.elitist.da
    }

    #[getter]
    fn valid_error(&self) -> f64 {
        self.inner.elitist.valid_error
    }

    /// `(quality, covered)` for normalized inputs.
    fn predict_quality(&self, x: Vec<f64>, a: Vec<f64>) -> PyResult<(f64, bool)> {
        check_len(&x, self.dx(), "x")?;
        check_len(&a, self.da(), "a")?;
        let p = self.inner.elitist.predict_quality(&x, &a);
        Ok((p.value, p.covered))
    }

    /// `(parametrization, covered)` for a normalized situation.
    fn predict_parametrization(&self, x: Vec<f64>) -> PyResult<(Vec<f64>, bool)> {
        check_len(&x, self.dx(), "x")?;
        let p = self.inner.elitist.predict_parametrization(&x);
        Ok((p.value, p.covered))
    }

    /// Rendered rules, lowest training error first.
    fn rules(&self) -> Vec<String> {
        harness::inspect(&self.inner)
    }

    /// Scores the model on a holdout CSV; returns the report as a dict.
    #[pyo3(signature = (holdout_csv, instance = None))]
    fn evaluate(&self, py: Python<'_>, holdout_csv: PathBuf, instance: Option<PathBuf>) -> PyResult<PyObject> {
        let mf = &self.inner;
        let problem = harness::load_problem(
            mf.problem,
            mf.problem_seed,
            instance.as_deref(),
            mf.config.oracle_restarts,
            mf.config.oracle_tol,
        )
        .map_err(py_err)?;
        let data = Dataset::read_csv(&holdout_csv).map_err(py_err)?;
        let r = harness::evaluate_model(&mf.elitist, data, problem.as_ref()).map_err(py_err)?;
        let d = pyo3::types::PyDict::new(py);
        d.set_item("n_examples", r.n_examples)?;
        d.set_item("rmse_quality_holdout", r.rmse_quality_holdout)?;
        d.set_item("rmse_choice_gap_holdout", r.rmse_choice_gap_holdout)?;
        d.set_item("mse_action_holdout", r.mse_action_holdout)?;
        d.set_item("unmatched_fraction", r.unmatched_fraction)?;
        Ok(d.into_any().unbind())
    }

    fn __len__(&self) -> usize {
        self.inner.elitist.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Model(problem={}, rules={}, valid_error={:.6})",
            self.inner.problem,
            self.inner.elitist.len(),
            self.inner.elitist.valid_error
        )
    }
}

/// Writes `train.csv`, `holdout.csv` (and `instance.txt`) into `out`.
#[pyfunction]
#[pyo3(signature = (problem, n, out, holdout = 1000, seed = 0, problem_seed = 0))]
fn gen_data(problem: &str, n: usize, out: PathBuf, holdout: usize, seed: u64, problem_seed: u64) -> PyResult<Vec<PathBuf>> {
    let problem: ProblemKind = problem.parse().map_err(py_err)?;
    harness::gen_data(&GenDataArgs {
        problem,
        problem_seed,
        n,
        holdout,
        seed,
        out_dir: out,
    })
    .map_err(py_err)
}

/// Runs a training experiment from TOML config text plus `key=value`
/// overrides. Returns the model file paths, one per repetition.
#[pyfunction]
#[pyo3(signature = (config = "", overrides = Vec::new()))]
fn train(py: Python<'_>, config: &str, overrides: Vec<String>) -> PyResult<Vec<PathBuf>> {
    let cfg = ExperimentConfig::parse(config, &overrides).map_err(py_err)?;
    let outcomes = py
        .allow_threads(|| harness::train(&cfg, |_, _| {}))
        .map_err(py_err)?;
    Ok(outcomes.into_iter().map(|o| o.model_path).collect())
}

#[pymodule]
fn pysuprb(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(frog_quality, m)?)?;
    m.add_function(wrap_pyfunction!(frog_optimal, m)?)?;
    m.add_function(wrap_pyfunction!(mix_weights, m)?)?;
    m.add_function(wrap_pyfunction!(gen_data, m)?)?;
    m.add_function(wrap_pyfunction!(train, m)?)?;
    m.add_class::<AmGauss>()?;
    m.add_class::<Model>()?;
    Ok(())
}
