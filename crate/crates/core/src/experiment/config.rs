//! Experiment configuration: defaults, `key = value` files and overrides.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::aos::{AosConfig, DEFAULT_ERROR_CLAMP};
use crate::elm::{Activation, ProjectionInit};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Aos,
    /// Boosted online ensemble whose weights are recomputed from scratch each chunk.
    AosNoForget,
    Eos,
    Vos,
    Vwos,
    AdaboostBatch,
}

impl ModelKind {
    pub const ALL: [ModelKind; 6] = [
        ModelKind::Aos,
        ModelKind::AosNoForget,
        ModelKind::Eos,
        ModelKind::Vos,
        ModelKind::Vwos,
        ModelKind::AdaboostBatch,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Aos => "aos",
            ModelKind::AosNoForget => "aos_no_forget",
            ModelKind::Eos => "eos",
            ModelKind::Vos => "vos",
            ModelKind::Vwos => "vwos",
            ModelKind::AdaboostBatch => "adaboost_batch",
        }
    }

    /// Whether the forgetting factor affects this model.
    pub fn uses_gamma(self) -> bool {
        self == ModelKind::Aos
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().replace('-', "_");
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Parameter(format!("unknown model `{s}`")))
    }
}

/// Where the train and test sets come from. CSV paths take precedence.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DataPaths {
    pub train_images: Option<PathBuf>,
    pub train_labels: Option<PathBuf>,
    pub test_images: Option<PathBuf>,
    pub test_labels: Option<PathBuf>,
    pub train_csv: Option<PathBuf>,
    pub test_csv: Option<PathBuf>,
    pub label_column: usize,
}

impl DataPaths {
    /// The four standard MNIST file names under `dir`.
    pub fn mnist_dir(dir: impl AsRef<Path>) -> Self {
        let dir = dir.as_ref();
        DataPaths {
            train_images: Some(dir.join("train-images-idx3-ubyte")),
            train_labels: Some(dir.join("train-labels-idx1-ubyte")),
            test_images: Some(dir.join("t10k-images-idx3-ubyte")),
            test_labels: Some(dir.join("t10k-labels-idx1-ubyte")),
            ..DataPaths::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub model: ModelKind,
    pub classifier_count: usize,
    pub hidden_count: usize,
    pub gamma: f64,
    pub initial_size: usize,
    pub chunk_size: usize,
    pub trials: usize,
    pub master_seed: u64,
    pub activation: Activation,
    pub projection: ProjectionInit,
    pub ridge: f64,
    pub error_clamp: f64,
    pub eval_every: usize,
    pub data: DataPaths,
    /// `None` feeds raw features to the models.
    pub pca_variance_target: Option<f64>,
    /// Trials run concurrently on up to this many threads.
    pub jobs: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            model: ModelKind::Aos,
            classifier_count: 30,
            hidden_count: 150,
            gamma: 0.95,
            initial_size: 200,
            chunk_size: 100,
            trials: 10,
            master_seed: 0,
            activation: Activation::Sigmoid,
            projection: ProjectionInit::default(),
            ridge: 0.0,
            error_clamp: DEFAULT_ERROR_CLAMP,
            eval_every: 10,
            data: DataPaths::default(),
            pca_variance_target: Some(0.9),
            jobs: 1,
        }
    }
}

pub const KEYS: &[&str] = &[
    "model",
    "classifiers",
    "hidden",
    "gamma",
    "initial_size",
    "chunk_size",
    "trials",
    "seed",
    "activation",
    "weight_range",
    "bias_range",
    "ridge",
    "error_clamp",
    "eval_every",
    "pca",
    "mnist_dir",
    "train_images",
    "train_labels",
    "test_images",
    "test_labels",
    "train_csv",
    "test_csv",
    "label_column",
    "jobs",
];

fn range(key: &str, value: &str) -> Result<(f64, f64)> {
    let (lo, hi) = value
        .split_once(',')
        .ok_or_else(|| Error::Parameter(format!("`{key}`: expected `low,high`, got `{value}`")))?;
    let (lo, hi): (f64, f64) = (num(key, lo.trim())?, num(key, hi.trim())?);
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::Parameter(format!("`{key}`: empty range `{value}`")));
    }
    Ok((lo, hi))
}

fn num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Parameter(format!("`{key}`: cannot parse `{value}`")))
}

impl ExperimentConfig {
    /// Sets one field from its textual key and value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        let path = || Some(PathBuf::from(value));
        match key.trim() {
            "model" => self.model = value.parse()?,
            "classifiers" => self.classifier_count = num(key, value)?,
            "hidden" => self.hidden_count = num(key, value)?,
            "gamma" => self.gamma = num(key, value)?,
            "initial_size" => self.initial_size = num(key, value)?,
            "chunk_size" => self.chunk_size = num(key, value)?,
            "trials" => self.trials = num(key, value)?,
            "seed" => self.master_seed = num(key, value)?,
            "activation" => self.activation = value.parse()?,
            "weight_range" => self.projection.weight_range = range(key, value)?,
            "bias_range" => self.projection.bias_range = range(key, value)?,
            "ridge" => self.ridge = num(key, value)?,
            "error_clamp" => self.error_clamp = num(key, value)?,
            "eval_every" => self.eval_every = num(key, value)?,
            "pca" => {
                self.pca_variance_target = match value {
                    "none" | "off" => None,
                    v => Some(num(key, v)?),
                }
            }
            "mnist_dir" => {
                let label_column = self.data.label_column;
                self.data = DataPaths {
                    label_column,
                    ..DataPaths::mnist_dir(value)
                }
            }
            "train_images" => self.data.train_images = path(),
            "train_labels" => self.data.train_labels = path(),
            "test_images" => self.data.test_images = path(),
            "test_labels" => self.data.test_labels = path(),
            "train_csv" => self.data.train_csv = path(),
            "test_csv" => self.data.test_csv = path(),
            "label_column" => self.data.label_column = num(key, value)?,
            "jobs" => self.jobs = num(key, value)?,
            other => return Err(Error::Parameter(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::Parameter(format!("config line {}: expected `key = value`", i + 1))
            })?;
            self.set(k, v)
                .map_err(|e| Error::Parameter(format!("config line {}: {e}", i + 1)))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.apply_text(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Parameter("trials must be ≥ 1".into()));
        }
        if self.eval_every == 0 {
            return Err(Error::Parameter("eval_every must be ≥ 1".into()));
        }
        if self.initial_size == 0 || self.chunk_size == 0 {
            return Err(Error::Parameter("initial_size and chunk_size must be ≥ 1".into()));
        }
        if self.jobs == 0 {
            return Err(Error::Parameter("jobs must be ≥ 1".into()));
        }
        if let Some(t) = self.pca_variance_target {
            if !(t > 0.0 && t <= 1.0) {
                return Err(Error::Parameter(format!("pca target must lie in (0, 1], got {t}")));
            }
        }
        self.aos_config(0).validate()
    }

    /// Ensemble settings for one trial, seeded by `model_seed`.
    pub fn aos_config(&self, model_seed: u64) -> AosConfig {
        AosConfig {
            classifier_count: self.classifier_count,
            hidden_count: self.hidden_count,
            gamma: match self.model {
                ModelKind::AosNoForget => 0.0,
                _ => self.gamma,
            },
            ridge: self.ridge,
            error_clamp: self.error_clamp,
            activation: self.activation,
            projection: self.projection,
            rng_seed: model_seed,
        }
    }

    /// Name used in report files.
    pub fn label(&self) -> String {
        self.model.name().to_string()
    }
}
