use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, ProblemKind};
use crate::error::{Error, Result};
use crate::ga::Individual;

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// A persisted elitist plus the run that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format_version: u32,
    pub problem: ProblemKind,
    pub problem_seed: u64,
    pub run: usize,
    pub run_seed: u64,
    pub repetition_seed: u64,
    pub generation: usize,
    pub config: ExperimentConfig,
    pub elitist: Individual,
}

impl ModelFile {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("model serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str, source_name: &str) -> Result<Self> {
        let model: ModelFile = serde_json::from_str(text).map_err(|e| Error::Parse {
            source_name: source_name.to_string(),
            offset: byte_offset(text, e.line(), e.column()),
            message: e.to_string(),
        })?;
        if model.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::Parse {
                source_name: source_name.to_string(),
                offset: 0,
                message: format!("unsupported format_version {}", model.format_version),
            });
        }
        let ind = &model.elitist;
        for c in &ind.classifiers {
            if c.condition.lower.len() != ind.dx || c.condition.upper.len() != ind.dx {
                return Err(Error::Dimension {
                    expected: ind.dx,
                    got: c.condition.lower.len(),
                    context: "model file condition",
                });
            }
            if let Some(m) = &c.model {
                if m.w_aa.len() != ind.da || m.w_xa.len() != ind.dx * ind.da {
                    return Err(Error::Dimension {
                        expected: ind.da,
                        got: m.w_aa.len(),
                        context: "model file coefficients",
                    });
                }
            }
        }
        Ok(model)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        super::write_atomic(path, self.to_json().as_bytes())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text, &path.display().to_string())
    }
}

/// serde_json reports 1-based line and column.
fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    let line_start: usize = text
        .split_inclusive('\n')
        .take(line.saturating_sub(1))
        .map(str::len)
        .sum();
    (line_start + column.saturating_sub(1)).min(text.len())
}
