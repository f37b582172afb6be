//! Experiment orchestration behind the `suprb` command line tool.

mod config;
mod model_file;
mod run;

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

pub use config::{ExperimentConfig, ProblemKind};
pub use model_file::{ModelFile, MODEL_FORMAT_VERSION};
pub use run::{
    evaluate_model, gen_data, inspect, load_problem, train, EvalReport, GenDataArgs, RunOutcome,
    HOLDOUT_FILE, INSTANCE_FILE, METRICS_FILE, POOL_FILE,
};

/// Writes through a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::Config(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp", file_name.to_string_lossy()));
    let mut f = std::fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    f.write_all(bytes).map_err(|e| Error::io(&tmp, e))?;
    f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    drop(f);
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}
