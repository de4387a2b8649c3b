//! Per-community forecasting: a stacked LSTM trained on sliding windows of a
//! min-max normalized series, predicting the next value.

mod lstm;
mod normalize;
mod train;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use lstm::{forward, forward_batch, loss, loss_and_gradients, ForwardCache, Head, LstmLayerParams, Params};
pub use normalize::Normalizer;
pub use train::{
    fit_series, predict_series, split_index, train, Adam, FittedSeries, PredictedPoint, Segment,
    TrainConfig,
};

#[derive(Debug, Error)]
pub enum ForecastError {
    #[error("non-finite activation at layer {layer}, step {step}")]
    NonFinite { layer: usize, step: usize },
    #[error("training diverged at epoch {epoch} (loss {loss})")]
    Diverged { epoch: usize, loss: f64 },
    #[error("empty training batch")]
    EmptyBatch,
    #[error("window length {got}, model expects {expected}")]
    WindowLength { expected: usize, got: usize },
    #[error("series of length {len} is too short, need at least {needed}")]
    SeriesTooShort { len: usize, needed: usize },
    #[error("invalid configuration: {0}")]
    BadConfig(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl ForecastError {
    fn at_epoch(self, epoch: usize) -> Self {
        match self {
            ForecastError::NonFinite { .. } => ForecastError::Diverged {
                epoch,
                loss: f64::NAN,
            },
            e => e,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    pub hidden_size: usize,
    pub window: usize,
    pub n_layers: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            hidden_size: 32,
            window: 5,
            n_layers: 4,
        }
    }
}

impl ModelConfig {
    fn validate(&self) -> Result<(), ForecastError> {
        if self.hidden_size == 0 || self.window == 0 || self.n_layers == 0 {
            return Err(ForecastError::BadConfig(format!(
                "hidden_size, window and n_layers must be positive (got {}, {}, {})",
                self.hidden_size, self.window, self.n_layers
            )));
        }
        Ok(())
    }
}

/// Parameters plus the normalizer they were trained against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmModel {
    pub config: ModelConfig,
    pub normalizer: Normalizer,
    pub params: Params,
}

impl LstmModel {
    pub fn new<R: Rng + ?Sized>(
        config: ModelConfig,
        normalizer: Normalizer,
        rng: &mut R,
    ) -> Result<Self, ForecastError> {
        config.validate()?;
        let params = Params::init(config.n_layers, config.hidden_size, rng);
        Ok(Self {
            config,
            normalizer,
            params,
        })
    }

    /// Next normalized value after a normalized window.
    pub fn predict(&self, window: &[f64]) -> Result<f64, ForecastError> {
        if window.len() != self.config.window {
            return Err(ForecastError::WindowLength {
                expected: self.config.window,
                got: window.len(),
            });
        }
        forward(&self.params, window)
    }
}

/// Sliding `(window, next)` pairs. A series shorter than `w + 1` yields none.
pub fn make_windows(series: &[f64], w: usize) -> Vec<(Vec<f64>, f64)> {
    if w == 0 || series.len() < w + 1 {
        log::warn!("series of length {} yields no windows of size {w}", series.len());
        return Vec::new();
    }
    series
        .windows(w + 1)
        .map(|s| (s[..w].to_vec(), s[w]))
        .collect()
}

pub const CHECKPOINT_FORMAT: &str = "citesbm-lstm";

/// Serialized trained model for one community.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub community_id: usize,
    pub split_index: usize,
    pub train: TrainConfig,
    pub model: LstmModel,
    pub loss_curve: Vec<f64>,
    #[serde(default)]
    pub meta: BTreeMap<String, String>,
}

impl Checkpoint {
    pub fn new(community_id: usize, fit: FittedSeries, train: TrainConfig) -> Self {
        Self {
            format: CHECKPOINT_FORMAT.into(),
            version: 1,
            community_id,
            split_index: fit.split_index,
            train,
            model: fit.model,
            loss_curve: fit.loss_curve,
            meta: BTreeMap::new(),
        }
    }

    pub fn save(&self, path: &Path) -> Result<(), ForecastError> {
        let mut json = serde_json::to_string_pretty(self).map_err(|source| ForecastError::Json {
            path: path.to_path_buf(),
            source,
        })?;
        json.push('\n');
        std::fs::write(path, json).map_err(|source| ForecastError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self, ForecastError> {
        let text = std::fs::read_to_string(path).map_err(|source| ForecastError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let ck: Checkpoint = serde_json::from_str(&text).map_err(|source| ForecastError::Json {
            path: path.to_path_buf(),
            source,
        })?;
        if ck.format != CHECKPOINT_FORMAT {
            return Err(ForecastError::BadConfig(format!(
                "{}: unknown checkpoint format `{}`",
                path.display(),
                ck.format
            )));
        }
        Ok(ck)
    }
}
