use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use suprb::data::Dataset;
use suprb::harness::{self, ExperimentConfig, GenDataArgs, ModelFile, ProblemKind};

#[derive(Parser)]
#[command(name = "suprb", version, about = "Evolve and evaluate interval rule sets for parametrization optimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate training-pool and holdout CSVs for a benchmark problem.
    GenData {
        #[arg(long)]
        problem: ProblemKind,
        /// Training pool size (later split into train/validation).
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        holdout: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// AM-Gauss instance seed.
        #[arg(long, default_value_t = 0)]
        problem_seed: u64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Run the GA and write metrics.csv plus one model file per repetition.
    Train {
        /// Flat TOML config; keys may also be given with --set.
        #[arg(long)]
        config: Option<PathBuf>,
        /// `key=value` override, repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        #[arg(long)]
        k: Option<f64>,
        #[arg(long)]
        generations: Option<usize>,
        #[arg(long)]
        repetitions: Option<usize>,
        #[arg(long)]
        run_seed: Option<u64>,
        #[arg(long)]
        output_dir: Option<PathBuf>,
        #[arg(long)]
        quiet: bool,
    },
    /// Score a model file on a holdout CSV.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        holdout: PathBuf,
        /// AM-Gauss instance file; regenerated from the model's seed if absent.
        #[arg(long)]
        instance: Option<PathBuf>,
        /// Report path; defaults to `<model>.eval.json`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the rules of a model file, lowest training error first.
    Inspect {
        #[arg(long)]
        model: PathBuf,
    },
}

fn run(cli: Cli) -> suprb::Result<()> {
    match cli.command {
        Command::GenData {
            problem,
            n,
            holdout,
            seed,
            problem_seed,
            out,
        } => {
            let written = harness::gen_data(&GenDataArgs {
                problem,
                problem_seed,
                n,
                holdout,
                seed,
                out_dir: out,
            })?;
            for p in written {
                println!("{}", p.display());
            }
        }
        Command::Train {
            config,
            mut set,
            k,
            generations,
            repetitions,
            run_seed,
            output_dir,
            quiet,
        } => {
            if let Some(v) = k {
                set.push(format!("k={v:?}"));
            }
            if let Some(v) = generations {
                set.push(format!("generations={v}"));
            }
            if let Some(v) = repetitions {
                set.push(format!("repetitions={v}"));
            }
            if let Some(v) = run_seed {
                set.push(format!("run_seed={v}"));
            }
            if let Some(v) = output_dir {
                set.push(format!("output_dir={:?}", v.display().to_string()));
            }
            let cfg = match config {
                Some(path) => ExperimentConfig::load(&path, &set)?,
                None => ExperimentConfig::parse("", &set)?,
            };
            let outcomes = harness::train(&cfg, |run, m| {
                if !quiet {
                    eprintln!(
                        "run {run} gen {:>4}  holdout rmse {:.4}  choice gap {:.4}  rules {}",
                        m.generation, m.rmse_quality_holdout, m.rmse_choice_gap_holdout, m.n_classifiers_elitist
                    );
                }
            })?;
            println!("{}", cfg.output_dir.join("metrics.csv").display());
            for o in outcomes {
                println!("{}", o.model_path.display());
            }
        }
        Command::Eval {
            model,
            holdout,
            instance,
            out,
        } => {
            let mf = ModelFile::read(&model)?;
            let problem = harness::load_problem(
                mf.problem,
                mf.problem_seed,
                instance.as_deref(),
                mf.config.oracle_restarts,
                mf.config.oracle_tol,
            )?;
            let data = Dataset::read_csv(&holdout)?;
            let report = harness::evaluate_model(&mf.elitist, data, problem.as_ref())?;
            let json = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
            print!("{json}");
            let out = out.unwrap_or_else(|| model.with_extension("eval.json"));
            harness::write_atomic(&out, json.as_bytes())?;
        }
        Command::Inspect { model } => {
            let mf = ModelFile::read(&model)?;
            for line in harness::inspect(&mf) {
                println!("{line}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
