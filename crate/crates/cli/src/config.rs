use std::path::Path;

use anyhow::{Context, Result};
use armplan_core::bench::BenchSpec;
use armplan_core::dataset::oracle_params;
use armplan_core::planners::PlannerParams;
use armplan_core::training::TrainConfig;
use serde::{Deserialize, Serialize};

/// Settings file given with `--config`, TOML or JSON by extension. Every section
/// and field is optional.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CliConfig {
    /// Parameters for `plan` and the base parameters of `bench`.
    pub planner: Option<PlannerParams>,
    /// Oracle parameters for `collect`.
    pub oracle: Option<PlannerParams>,
    pub train: TrainConfig,
    pub bench: BenchSpec,
}

impl CliConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).map_err(|source| armplan_core::Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let parsed = match path.extension().and_then(|e| e.to_str()) {
            Some("json") => serde_json::from_str(&text).map_err(|e| e.to_string()),
            _ => toml::from_str(&text).map_err(|e| e.to_string()),
        };
        parsed
            .map_err(|detail| armplan_core::Error::Format {
                path: Some(path.to_path_buf()),
                detail,
            })
            .with_context(|| format!("reading config {}", path.display()))
    }

    pub fn planner(&self) -> PlannerParams {
        self.planner.clone().unwrap_or_default()
    }

    pub fn oracle(&self) -> PlannerParams {
        self.oracle.clone().unwrap_or_else(oracle_params)
    }
}
