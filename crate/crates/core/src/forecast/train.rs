use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::lstm::{loss, loss_and_gradients, Params};
use super::{make_windows, ForecastError, LstmModel, ModelConfig, Normalizer};

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const EPS: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    /// Global gradient-norm cap; non-positive disables clipping.
    pub clip_norm: f64,
    pub train_fraction: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 500,
            learning_rate: 1e-3,
            clip_norm: 5.0,
            train_fraction: 0.8,
            seed: 0,
        }
    }
}

/// Adam moments, shaped like the parameters.
#[derive(Debug, Clone)]
pub struct Adam {
    m: Params,
    v: Params,
    t: i32,
    lr: f64,
}

impl Adam {
    pub fn new(params: &Params, lr: f64) -> Self {
        let zeros = Params::zeros(params.layers.len(), params.hidden_size());
        Self {
            m: zeros.clone(),
            v: zeros,
            t: 0,
            lr,
        }
    }

    pub fn step(&mut self, params: &mut Params, grads: &Params) {
        self.t += 1;
        let c1 = 1.0 - BETA1.powi(self.t);
        let c2 = 1.0 - BETA2.powi(self.t);
        let tensors = params
            .tensors_mut()
            .into_iter()
            .zip(grads.tensors())
            .zip(self.m.tensors_mut())
            .zip(self.v.tensors_mut());
        for (((p, g), m), v) in tensors {
            for i in 0..p.len() {
                m[i] = BETA1 * m[i] + (1.0 - BETA1) * g[i];
                v[i] = BETA2 * v[i] + (1.0 - BETA2) * g[i] * g[i];
                p[i] -= self.lr * (m[i] / c1) / ((v[i] / c2).sqrt() + EPS);
            }
        }
    }
}

/// Full-batch Adam on `samples`. Returns the loss before each epoch's update
/// followed by the loss after the last one (`epochs + 1` entries).
pub fn train(
    model: &mut LstmModel,
    samples: &[(Vec<f64>, f64)],
    cfg: &TrainConfig,
) -> Result<Vec<f64>, ForecastError> {
    if samples.is_empty() {
        return Err(ForecastError::EmptyBatch);
    }
    for (w, _) in samples {
        if w.len() != model.config.window {
            return Err(ForecastError::WindowLength {
                expected: model.config.window,
                got: w.len(),
            });
        }
    }
    let mut adam = Adam::new(&model.params, cfg.learning_rate);
    let mut curve = Vec::with_capacity(cfg.epochs + 1);
    for epoch in 0..cfg.epochs {
        let (l, mut grads) = loss_and_gradients(&model.params, samples)
            .map_err(|e| e.at_epoch(epoch))?;
        if !l.is_finite() {
            return Err(ForecastError::Diverged { epoch, loss: l });
        }
        curve.push(l);
        if cfg.clip_norm > 0.0 {
            let norm = grads.norm();
            if norm > cfg.clip_norm {
                grads.scale(cfg.clip_norm / norm);
            }
        }
        adam.step(&mut model.params, &grads);
    }
    let last = loss(&model.params, samples).map_err(|e| e.at_epoch(cfg.epochs))?;
    if !last.is_finite() {
        return Err(ForecastError::Diverged {
            epoch: cfg.epochs,
            loss: last,
        });
    }
    curve.push(last);
    Ok(curve)
}

/// Index of the first test point: `round(len * fraction)`, pushed up so that
/// at least one full window precedes it.
pub fn split_index(len: usize, fraction: f64, window: usize) -> usize {
    let raw = (len as f64 * fraction).round() as usize;
    raw.max(window + 1).min(len)
}

/// A model trained on the prefix of one series.
#[derive(Debug, Clone)]
pub struct FittedSeries {
    pub model: LstmModel,
    pub split_index: usize,
    pub loss_curve: Vec<f64>,
}

/// Normalize on the training prefix, window it, initialize from `cfg.seed`
/// and train.
pub fn fit_series(
    counts: &[f64],
    model_cfg: &ModelConfig,
    cfg: &TrainConfig,
) -> Result<FittedSeries, ForecastError> {
    let split = split_index(counts.len(), cfg.train_fraction, model_cfg.window);
    if counts.len() < model_cfg.window + 1 {
        return Err(ForecastError::SeriesTooShort {
            len: counts.len(),
            needed: model_cfg.window + 1,
        });
    }
    let normalizer = Normalizer::fit(&counts[..split]);
    let scaled: Vec<f64> = counts[..split].iter().map(|&x| normalizer.normalize(x)).collect();
    let samples = make_windows(&scaled, model_cfg.window);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut model = LstmModel::new(model_cfg.clone(), normalizer, &mut rng)?;
    let loss_curve = train(&mut model, &samples, cfg)?;
    Ok(FittedSeries {
        model,
        split_index: split,
        loss_curve,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Segment {
    Train,
    Test,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictedPoint {
    pub index: usize,
    pub truth: f64,
    pub predicted: f64,
    pub segment: Segment,
}

/// One-step-ahead predictions for every index with a full window behind it.
/// Teacher-forced by default; with `recursive`, windows reaching into the
/// test segment use earlier predictions instead of observed values.
/// Predictions are clamped at zero in count space.
pub fn predict_series(
    model: &LstmModel,
    counts: &[f64],
    split_index: usize,
    recursive: bool,
) -> Result<Vec<PredictedPoint>, ForecastError> {
    let w = model.config.window;
    if split_index < w || split_index > counts.len() {
        return Err(ForecastError::BadConfig(format!(
            "split index {split_index} needs {w} points before it and at most {} total",
            counts.len()
        )));
    }
    let mut inputs: Vec<f64> = counts.to_vec();
    let mut out = Vec::with_capacity(counts.len().saturating_sub(w));
    for t in w..counts.len() {
        let window: Vec<f64> = inputs[t - w..t]
            .iter()
            .map(|&x| model.normalizer.normalize(x))
            .collect();
        let y = model.predict(&window)?;
        let predicted = model.normalizer.denormalize(y).max(0.0);
        let segment = if t < split_index {
            Segment::Train
        } else {
            Segment::Test
        };
        if recursive && segment == Segment::Test {
            inputs[t] = predicted;
        }
        out.push(PredictedPoint {
            index: t,
            truth: counts[t],
            predicted,
            segment,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_respects_window() {
        assert_eq!(split_index(44, 0.8, 5), 35);
        assert_eq!(split_index(8, 0.5, 5), 6);
        assert_eq!(split_index(5, 0.8, 5), 5);
    }

    #[test]
    fn adam_first_step_is_lr_sized() {
        let mut p = Params::zeros(1, 2);
        let mut g = Params::zeros(1, 2);
        g.head.bias[0] = 0.3;
        g.head.weights[0] = -7.0;
        let mut adam = Adam::new(&p, 0.01);
        adam.step(&mut p, &g);
        assert!((p.head.bias[0] + 0.01).abs() < 1e-9);
        assert!((p.head.weights[0] - 0.01).abs() < 1e-9);
        assert_eq!(p.head.weights[1], 0.0);
    }

    #[test]
    fn training_reduces_loss() {
        let counts: Vec<f64> = (0..20).map(|i| (i * 3) as f64).collect();
        let cfg = TrainConfig {
            epochs: 100,
            learning_rate: 1e-2,
            ..TrainConfig::default()
        };
        let mc = ModelConfig {
            hidden_size: 8,
            window: 3,
            n_layers: 1,
        };
        let fit = fit_series(&counts, &mc, &cfg).unwrap();
        assert_eq!(fit.loss_curve.len(), 101);
        assert!(fit.loss_curve[100] < fit.loss_curve[0]);
    }

    #[test]
    fn prediction_segments_and_clamp() {
        let counts: Vec<f64> = vec![5.0, 4.0, 3.0, 2.0, 1.0, 0.0, 0.0, 0.0];
        let mc = ModelConfig {
            hidden_size: 4,
            window: 2,
            n_layers: 1,
        };
        let fit = fit_series(
            &counts,
            &mc,
            &TrainConfig {
                epochs: 5,
                ..TrainConfig::default()
            },
        )
        .unwrap();
        let pts = predict_series(&fit.model, &counts, fit.split_index, false).unwrap();
        assert_eq!(pts.len(), 6);
        assert!(pts.iter().all(|p| p.predicted >= 0.0));
        assert_eq!(
            pts.iter().filter(|p| p.segment == Segment::Test).count(),
            counts.len() - fit.split_index
        );
        let rec = predict_series(&fit.model, &counts, fit.split_index, true).unwrap();
        assert_eq!(rec.len(), pts.len());
        assert!(predict_series(&fit.model, &counts, 1, false).is_err());
    }
}
