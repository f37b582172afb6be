use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ga::GaConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemKind {
    Frog,
    AmGauss,
}

impl std::str::FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "frog" => Ok(ProblemKind::Frog),
            "am-gauss" => Ok(ProblemKind::AmGauss),
            other => Err(Error::Config(format!(
                "unknown problem `{other}` (expected frog or am-gauss)"
            ))),
        }
    }
}

impl std::fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ProblemKind::Frog => "frog",
            ProblemKind::AmGauss => "am-gauss",
        })
    }
}

/// Flat on-disk layout; every key optional except `k`.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    problem: Option<ProblemKind>,
    problem_seed: Option<u64>,
    n_train_pool: Option<usize>,
    n_holdout: Option<usize>,
    validation_fraction: Option<f64>,
    run_seed: Option<u64>,
    repetitions: Option<usize>,
    output_dir: Option<PathBuf>,
    data_dir: Option<PathBuf>,
    oracle_restarts: Option<usize>,
    oracle_tol: Option<f64>,

    population_size: Option<usize>,
    elitists: Option<usize>,
    initial_individual_size: Option<usize>,
    k: Option<f64>,
    one_fifth_factor: Option<f64>,
    crossover_rate: Option<f64>,
    initial_step_size: Option<f64>,
    generations: Option<usize>,
    random_classifier_prob: Option<f64>,
    clip_mutation: Option<bool>,
    include_linear: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub problem: ProblemKind,
    pub problem_seed: u64,
    /// Examples split into training and validation sets.
    pub n_train_pool: usize,
    pub n_holdout: usize,
    pub validation_fraction: f64,
    pub ga: GaConfig,
    pub run_seed: u64,
    pub repetitions: usize,
    pub output_dir: PathBuf,
    /// Reads `train.csv` / `holdout.csv` (and `instance.txt`) from here
    /// instead of generating data per repetition.
    pub data_dir: Option<PathBuf>,
    pub oracle_restarts: usize,
    pub oracle_tol: f64,
}

impl ExperimentConfig {
    /// Parses flat `key = value` TOML, applying `overrides` (also
    /// `key=value`) on top.
    pub fn parse(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        for o in overrides {
            let (key, value) = o
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("override `{o}` is not key=value")))?;
            let key = key.trim();
            let value = value.trim();
            let parsed = format!("v = {value}")
                .parse::<toml::Table>()
                .ok()
                .and_then(|mut t| t.remove("v"))
                .unwrap_or_else(|| toml::Value::String(value.to_string()));
            table.insert(key.to_string(), parsed);
        }
        let raw: RawConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))?;
        Self::from_raw(raw)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, overrides)
    }

    fn from_raw(r: RawConfig) -> Result<Self> {
        let k = r
            .k
            .ok_or_else(|| Error::Config("missing key `k` (no default; problem dependent)".into()))?;
        let mut ga = GaConfig::with_k(k);
        macro_rules! set {
            ($($field:ident),*) => {$(if let Some(v) = r.$field { ga.$field = v; })*};
        }
        set!(
            population_size,
            elitists,
            initial_individual_size,
            one_fifth_factor,
            crossover_rate,
            initial_step_size,
            generations,
            random_classifier_prob,
            clip_mutation,
            include_linear
        );
        ga.validate()?;
        let problem = r.problem.unwrap_or(ProblemKind::Frog);
        let cfg = ExperimentConfig {
            problem,
            problem_seed: r.problem_seed.unwrap_or(0),
            n_train_pool: r.n_train_pool.unwrap_or(match problem {
                ProblemKind::Frog => 100,
                ProblemKind::AmGauss => 2000,
            }),
            n_holdout: r.n_holdout.unwrap_or(1000),
            validation_fraction: r.validation_fraction.unwrap_or(0.5),
            ga,
            run_seed: r.run_seed.unwrap_or(0),
            repetitions: r.repetitions.unwrap_or(1),
            output_dir: r.output_dir.unwrap_or_else(|| PathBuf::from("runs")),
            data_dir: r.data_dir,
            oracle_restarts: r.oracle_restarts.unwrap_or(64),
            oracle_tol: r.oracle_tol.unwrap_or(1e-8),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_train_pool == 0 || self.n_holdout == 0 || self.repetitions == 0 {
            return Err(Error::Config(
                "n_train_pool, n_holdout and repetitions must be positive".into(),
            ));
        }
        if !(self.validation_fraction > 0.0 && self.validation_fraction < 1.0) {
            return Err(Error::Config(format!(
                "validation_fraction = {} not in (0, 1)",
                self.validation_fraction
            )));
        }
        if self.oracle_restarts == 0 {
            return Err(Error::Config("oracle_restarts must be positive".into()));
        }
        self.ga.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_hyperparameter_table() {
        let cfg = ExperimentConfig::parse("k = 0.1", &[]).unwrap();
        assert_eq!(cfg.ga, GaConfig::with_k(0.1));
        assert_eq!(cfg.ga.population_size, 30);
        assert_eq!(cfg.ga.elitists, 1);
        assert_eq!(cfg.ga.initial_individual_size, 30);
        assert_eq!(cfg.ga.one_fifth_factor, 1.05);
        assert_eq!(cfg.ga.crossover_rate, 0.9);
        assert_eq!(cfg.ga.initial_step_size, 0.002);
        assert_eq!(cfg.validation_fraction, 0.5);
    }

    #[test]
    fn k_is_required() {
        let err = ExperimentConfig::parse("generations = 5", &[]).unwrap_err();
        assert!(err.to_string().contains("`k`"));
    }

    #[test]
    fn unknown_key_is_named() {
        let err = ExperimentConfig::parse("k = 0.1\nmutation_sigma = 3", &[]).unwrap_err();
        assert!(err.to_string().contains("mutation_sigma"), "{err}");
    }

    #[test]
    fn overrides_win() {
        let cfg = ExperimentConfig::parse(
            "k = 0.1\nproblem = \"frog\"",
            &["k=1e-6".into(), "problem=am-gauss".into(), "generations = 7".into()],
        )
        .unwrap();
        assert_eq!(cfg.ga.k, 1e-6);
        assert_eq!(cfg.problem, ProblemKind::AmGauss);
        assert_eq!(cfg.ga.generations, 7);
        assert_eq!(cfg.n_train_pool, 2000);
    }

    #[test]
    fn invalid_values_rejected() {
        assert!(ExperimentConfig::parse("k = 1.5", &[]).is_err());
        assert!(ExperimentConfig::parse("k = 0.1\nvalidation_fraction = 1.0", &[]).is_err());
        assert!(ExperimentConfig::parse("k = 0.1\nelitists = 30", &[]).is_err());
    }
}
