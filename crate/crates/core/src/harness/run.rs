use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::{ExperimentConfig, ProblemKind};
use super::model_file::{ModelFile, MODEL_FORMAT_VERSION};
use super::write_atomic;
use crate::data::{split_dataset, Dataset};
use crate::error::{Error, Result};
use crate::ga::{evolve, GenerationStats, Individual};
use crate::metrics::{EvalSet, GenerationMetrics};
use crate::problems::{frog, AmGaussInstance, AmGaussProblem, Frog, Problem};
use crate::seeds::{self, Stream};

pub const POOL_FILE: &str = "train.csv";
pub const HOLDOUT_FILE: &str = "holdout.csv";
pub const INSTANCE_FILE: &str = "instance.txt";
pub const METRICS_FILE: &str = "metrics.csv";

#[derive(Debug, Clone)]
pub struct GenDataArgs {
    pub problem: ProblemKind,
    pub problem_seed: u64,
    pub n: usize,
    pub holdout: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
}

/// Pool and holdout sets for one data seed.
fn generate(
    problem: ProblemKind,
    instance: Option<&AmGaussInstance>,
    n: usize,
    n_holdout: usize,
    seed: u64,
) -> (Dataset, Dataset) {
    let mut pool_rng = seeds::rng(seed, Stream::Data, 0);
    let mut holdout_rng = seeds::rng(seed, Stream::Holdout, 0);
    match problem {
        ProblemKind::Frog => (
            frog::dataset(n, &mut pool_rng),
            frog::dataset(n_holdout, &mut holdout_rng),
        ),
        ProblemKind::AmGauss => {
            let inst = instance.expect("am-gauss data needs an instance");
            (inst.dataset(n, &mut pool_rng), inst.dataset(n_holdout, &mut holdout_rng))
        }
    }
}

/// Writes `train.csv`, `holdout.csv` and, for AM-Gauss, `instance.txt`.
pub fn gen_data(args: &GenDataArgs) -> Result<Vec<PathBuf>> {
    if args.n == 0 || args.holdout == 0 {
        return Err(Error::Config("--n and --holdout must be positive".into()));
    }
    let instance = (args.problem == ProblemKind::AmGauss)
        .then(|| AmGaussInstance::generate(args.problem_seed));
    let (pool, holdout) = generate(args.problem, instance.as_ref(), args.n, args.holdout, args.seed);
    let mut written = vec![args.out_dir.join(POOL_FILE), args.out_dir.join(HOLDOUT_FILE)];
    pool.write_csv(&written[0])?;
    holdout.write_csv(&written[1])?;
    if let Some(inst) = instance {
        let p = args.out_dir.join(INSTANCE_FILE);
        inst.write(&p)?;
        written.push(p);
    }
    Ok(written)
}

pub fn load_problem(
    kind: ProblemKind,
    problem_seed: u64,
    instance_file: Option<&Path>,
    restarts: usize,
    tol: f64,
) -> Result<Box<dyn Problem>> {
    Ok(match kind {
        ProblemKind::Frog => Box::new(Frog),
        ProblemKind::AmGauss => {
            let instance = match instance_file {
                Some(p) => AmGaussInstance::read(p)?,
                None => AmGaussInstance::generate(problem_seed),
            };
            let mut p = AmGaussProblem::new(instance);
            p.restarts = restarts;
            p.tol = tol;
            Box::new(p)
        }
    })
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub metrics: Vec<GenerationMetrics>,
    pub model_path: PathBuf,
    pub model: ModelFile,
}

fn check_dims(data: &Dataset, problem: &dyn Problem, what: &'static str) -> Result<()> {
    if data.dx() != problem.dx() || data.da() != problem.da() {
        return Err(Error::Dimension {
            expected: problem.dx() + problem.da(),
            got: data.dx() + data.da(),
            context: what,
        });
    }
    Ok(())
}

/// Runs every repetition, writing `metrics.csv` and one model file per run.
pub fn train(cfg: &ExperimentConfig, mut progress: impl FnMut(usize, &GenerationMetrics)) -> Result<Vec<RunOutcome>> {
    cfg.validate()?;
    let instance_path = cfg.data_dir.as_ref().map(|d| d.join(INSTANCE_FILE));
    let problem = load_problem(
        cfg.problem,
        cfg.problem_seed,
        instance_path.as_deref().filter(|p| p.exists()),
        cfg.oracle_restarts,
        cfg.oracle_tol,
    )?;
    let instance = match cfg.problem {
        ProblemKind::AmGauss => Some(AmGaussInstance::generate(cfg.problem_seed)),
        ProblemKind::Frog => None,
    };

    let shared = match &cfg.data_dir {
        Some(dir) => {
            let pool = Dataset::read_csv(&dir.join(POOL_FILE))?;
            let holdout = Dataset::read_csv(&dir.join(HOLDOUT_FILE))?;
            check_dims(&pool, problem.as_ref(), "pool vs problem")?;
            check_dims(&holdout, problem.as_ref(), "holdout vs problem")?;
            Some((pool, EvalSet::new(holdout, problem.as_ref())))
        }
        None => None,
    };

    let mut csv = format!("run,{}\n", GenerationMetrics::HEADER);
    let mut outcomes = Vec::with_capacity(cfg.repetitions);
    for run in 0..cfg.repetitions {
        let rep_seed = seeds::derive(cfg.run_seed, Stream::Repetition, run as u64);
        let generated;
        let (pool, holdout) = match &shared {
            Some((pool, holdout)) => (pool, holdout),
            None => {
                let (pool, holdout) = generate(
                    cfg.problem,
                    instance.as_ref(),
                    cfg.n_train_pool,
                    cfg.n_holdout,
                    rep_seed,
                );
                let data_dir = cfg.output_dir.join("data").join(format!("run_{run:03}"));
                pool.write_csv(&data_dir.join(POOL_FILE))?;
                holdout.write_csv(&data_dir.join(HOLDOUT_FILE))?;
                if let Some(inst) = &instance {
                    inst.write(&data_dir.join(INSTANCE_FILE))?;
                }
                generated = (pool, EvalSet::new(holdout, problem.as_ref()));
                (&generated.0, &generated.1)
            }
        };
        let (train_set, valid_set) = split_dataset(
            pool,
            cfg.validation_fraction,
            &mut seeds::rng(rep_seed, Stream::Split, 0),
        )?;

        let mut rows: Vec<GenerationMetrics> = Vec::with_capacity(cfg.ga.generations);
        let mut observer = |stats: &GenerationStats, elitist: &Individual| {
            let m = GenerationMetrics::compute(
                stats.generation,
                elitist,
                &train_set,
                &valid_set,
                holdout,
                problem.as_ref(),
                stats.step_size,
            )?;
            progress(run, &m);
            rows.push(m);
            Ok(())
        };
        let outcome = evolve(
            &cfg.ga,
            &train_set,
            &valid_set,
            &mut seeds::rng(rep_seed, Stream::Evolution, 0),
            &mut observer,
        )?;
        for m in &rows {
            writeln!(csv, "{run},{}", m.csv_row()).unwrap();
        }
        let model = ModelFile {
            format_version: MODEL_FORMAT_VERSION,
            problem: cfg.problem,
            problem_seed: cfg.problem_seed,
            run,
            run_seed: cfg.run_seed,
            repetition_seed: rep_seed,
            generation: cfg.ga.generations,
            config: cfg.clone(),
            elitist: outcome.elitist,
        };
        let model_path = cfg.output_dir.join(format!("model_run{run:03}.json"));
        model.write(&model_path)?;
        outcomes.push(RunOutcome {
            metrics: rows,
            model_path,
            model,
        });
    }
    write_atomic(&cfg.output_dir.join(METRICS_FILE), csv.as_bytes())?;
    Ok(outcomes)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub n_examples: usize,
    pub rmse_quality_holdout: f64,
    pub rmse_choice_gap_holdout: f64,
    pub mse_action_holdout: f64,
    pub unmatched_fraction: f64,
}

pub fn evaluate_model(model: &Individual, holdout: Dataset, problem: &dyn Problem) -> Result<EvalReport> {
    if holdout.dx() != model.dx || holdout.da() != model.da {
        return Err(Error::Dimension {
            expected: model.dx,
            got: holdout.dx(),
            context: "holdout vs model situation dimension",
        });
    }
    check_dims(&holdout, problem, "holdout vs problem")?;
    let n = holdout.len();
    let unmatched = model.unmatched_count(&holdout);
    let eval = EvalSet::new(holdout, problem);
    Ok(EvalReport {
        n_examples: n,
        rmse_quality_holdout: crate::metrics::quality_rmse(model, &eval.data),
        rmse_choice_gap_holdout: crate::metrics::choice_gap(model, &eval, problem),
        mse_action_holdout: crate::metrics::action_mse(model, &eval, problem),
        unmatched_fraction: unmatched as f64 / n.max(1) as f64,
    })
}

/// Rule listing sorted by training error, best first.
pub fn inspect(model: &ModelFile) -> Vec<String> {
    let mut cls: Vec<_> = model.elitist.classifiers.iter().collect();
    cls.sort_by(|a, b| a.train_error.total_cmp(&b.train_error));
    cls.into_iter().map(|c| c.render()).collect()
}
