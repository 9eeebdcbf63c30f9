//! Experiment configs for `train` and `morph`.
//!
//! ```json
//! {
//!   "dataset": { "name": "circle", "n": 100, "seed": 0 },
//!   "train": { "batch_size": 80, "learning_rate": 0.001, "epochs": 100,
//!              "rtd_start_epoch": 20, "optimizer": { "kind": "adam",
//!              "beta1": 0.9, "beta2": 0.999, "eps": 1e-8 } },
//!   "metrics": { "enabled": true, "include_h1": false },
//!   "output_dir": "runs/circle",
//!   "seeds": [0, 1, 2]
//! }
//! ```
//!
//! Relative paths inside a config file are resolved against the directory
//! that holds it.

use std::path::{Path, PathBuf};

use rtd_core::datasets::DatasetSpec;
use rtd_core::metrics::{EvalOptions, DEFAULT_TRIPLETS};
use rtd_core::model::TrainConfig;
use rtd_core::optimize::OptimizerConfig;
use serde::{Deserialize, Serialize};

use crate::error::{usage, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsConfig {
    pub enabled: bool,
    pub include_h1: bool,
    pub num_triplets: usize,
    pub sample_size: Option<usize>,
    pub resamples: usize,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        MetricsConfig {
            enabled: true,
            include_h1: false,
            num_triplets: DEFAULT_TRIPLETS,
            sample_size: None,
            resamples: 5,
        }
    }
}

impl MetricsConfig {
    pub fn options(&self, seed: u64) -> EvalOptions {
        EvalOptions {
            num_triplets: self.num_triplets,
            seed,
            include_h1: self.include_h1,
            sample_size: self.sample_size,
            resamples: self.resamples,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// The data to embed (`train`) or the fixed target (`morph`).
    pub dataset: DatasetSpec,
    #[serde(default)]
    pub train: Option<TrainConfig>,
    #[serde(default)]
    pub optimizer: Option<OptimizerConfig>,
    /// Starting cloud for `morph`; uniform random 2D points when absent.
    #[serde(default)]
    pub init: Option<DatasetSpec>,
    #[serde(default)]
    pub metrics: MetricsConfig,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// One run per seed; the training or init seed when empty.
    #[serde(default)]
    pub seeds: Vec<u64>,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("runs")
}

/// Parses JSON into `T`, reporting the path of the offending field.
pub fn parse_json<T: serde::de::DeserializeOwned>(text: &str, source: &str) -> CliResult<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    match serde_path_to_error::deserialize(de) {
        Ok(v) => Ok(v),
        Err(e) => {
            let path = e.path().to_string();
            let inner = e.into_inner();
            if path == "." {
                usage(format!("{source}: {inner}"))
            } else {
                usage(format!("{source}: at {path}: {inner}"))
            }
        }
    }
}

fn resolve(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => return usage(format!("cannot read config {}: {e}", path.display())),
        };
        let mut cfg: ExperimentConfig = parse_json(&text, &path.display().to_string())?;
        let base = path.parent().unwrap_or(Path::new("."));
        for spec in std::iter::once(&mut cfg.dataset).chain(cfg.init.as_mut()) {
            if let Some(p) = spec.path.as_mut() {
                resolve(base, p);
            }
        }
        resolve(base, &mut cfg.output_dir);
        Ok(cfg)
    }

    /// Field-level checks that serde cannot express.
    pub fn validate(&self) -> CliResult<()> {
        let check = |field: &str, r: rtd_core::Result<()>| match r {
            Ok(()) => Ok(()),
            Err(e) => usage(format!("{field}: {e}")),
        };
        if let Some(t) = &self.train {
            check("train", t.validate())?;
        }
        if let Some(o) = &self.optimizer {
            check("optimizer", o.validate())?;
        }
        for (field, spec) in std::iter::once(("dataset", &self.dataset)).chain(self.init.as_ref().map(|s| ("init", s))) {
            if let Some(p) = &spec.path {
                if !p.exists() {
                    return usage(format!("{field}.path: {} does not exist", p.display()));
                }
            }
        }
        if self.metrics.num_triplets == 0 {
            return usage("metrics.num_triplets: must be positive");
        }
        if self.metrics.sample_size.is_some() && self.metrics.resamples == 0 {
            return usage("metrics.resamples: must be positive when sample_size is set");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::CliError;

    #[test]
    fn unknown_field_is_reported_with_its_path() {
        let text = r#"{"dataset": {"name": "circle"}, "train": {"epochs": 3, "epoch": 4}}"#;
        match parse_json::<ExperimentConfig>(text, "cfg.json") {
            Err(CliError::Usage(m)) => assert!(m.contains("train.epoch"), "{m}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn wrong_type_is_reported_with_its_path() {
        let text = r#"{"dataset": {"name": "circle", "n": "many"}}"#;
        match parse_json::<ExperimentConfig>(text, "cfg.json") {
            Err(CliError::Usage(m)) => assert!(m.contains("dataset.n"), "{m}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn defaults_fill_missing_sections() {
        let cfg: ExperimentConfig = parse_json(r#"{"dataset": {"name": "torus"}}"#, "x").unwrap();
        assert!(cfg.metrics.enabled);
        assert!(cfg.seeds.is_empty());
        assert_eq!(cfg.output_dir, PathBuf::from("runs"));
        cfg.validate().unwrap();
    }

    #[test]
    fn semantic_errors_name_the_section() {
        let mut cfg: ExperimentConfig = parse_json(r#"{"dataset": {"name": "circle"}, "train": {"batch_size": 1}}"#, "x").unwrap();
        match cfg.validate() {
            Err(CliError::Usage(m)) => assert!(m.starts_with("train:"), "{m}"),
            other => panic!("unexpected {other:?}"),
        }
        cfg.train = None;
        cfg.dataset.path = Some(PathBuf::from("/nonexistent/file.csv"));
        assert!(matches!(cfg.validate(), Err(CliError::Usage(m)) if m.starts_with("dataset.path")));
    }
}
