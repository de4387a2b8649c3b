use serde::{Deserialize, Serialize};

/// Affine min-max map onto [0, 1], fitted on the training segment only. A
/// constant segment is shifted so that its value lands on 0.5.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub min: f64,
    pub max: f64,
}

impl Normalizer {
    /// Fit on `train`; callers pass only the pre-split prefix of a series.
    pub fn fit(train: &[f64]) -> Self {
        let min = train.iter().copied().fold(f64::INFINITY, f64::min);
        let max = train.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if train.is_empty() {
            return Self { min: 0.0, max: 0.0 };
        }
        Self { min, max }
    }

    fn degenerate(&self) -> bool {
        self.max <= self.min
    }

    pub fn normalize(&self, x: f64) -> f64 {
        if self.degenerate() {
            x - self.min + 0.5
        } else {
            (x - self.min) / (self.max - self.min)
        }
    }

    pub fn denormalize(&self, y: f64) -> f64 {
        if self.degenerate() {
            y - 0.5 + self.min
        } else {
            y * (self.max - self.min) + self.min
        }
    }
}
