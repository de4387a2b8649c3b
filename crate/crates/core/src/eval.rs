//! Forecast accuracy: MAPE and direction accuracy, per community and
//! aggregated.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::forecast::{PredictedPoint, Segment};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("length mismatch: {truth} truth values, {predicted} predictions")]
    LengthMismatch { truth: usize, predicted: usize },
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

fn check_len(truth: &[f64], predicted: &[f64]) -> Result<(), EvalError> {
    if truth.len() != predicted.len() {
        return Err(EvalError::LengthMismatch {
            truth: truth.len(),
            predicted: predicted.len(),
        });
    }
    Ok(())
}

/// Mean absolute percentage error, in percent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mape {
    /// `None` when every truth value is zero.
    pub value: Option<f64>,
    /// Points dropped because their truth value is zero.
    pub excluded_zero: usize,
}

/// `100 * mean |truth - predicted| / |truth|` over points with non-zero truth.
pub fn mape(truth: &[f64], predicted: &[f64]) -> Result<Mape, EvalError> {
    check_len(truth, predicted)?;
    let mut sum = 0.0;
    let mut used = 0usize;
    for (&t, &p) in truth.iter().zip(predicted) {
        if t == 0.0 {
            continue;
        }
        sum += ((t - p) / t).abs();
        used += 1;
    }
    Ok(Mape {
        value: (used > 0).then(|| 100.0 * sum / used as f64),
        excluded_zero: truth.len() - used,
    })
}

fn sign(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// Percentage of steps `t >= 1` where `predicted[t] - truth[t-1]` has the
/// same sign as `truth[t] - truth[t-1]` (zero matches only zero). `None`
/// for fewer than two points.
pub fn direction_accuracy(truth: &[f64], predicted: &[f64]) -> Result<Option<f64>, EvalError> {
    check_len(truth, predicted)?;
    if truth.len() < 2 {
        return Ok(None);
    }
    let hits = (1..truth.len())
        .filter(|&t| sign(predicted[t] - truth[t - 1]) == sign(truth[t] - truth[t - 1]))
        .count();
    Ok(Some(100.0 * hits as f64 / (truth.len() - 1) as f64))
}

/// Metrics on one segment of one series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentMetrics {
    pub n_points: usize,
    pub mape: Option<f64>,
    pub mape_excluded_zero: usize,
    pub direction_accuracy: Option<f64>,
}

impl SegmentMetrics {
    /// `anchor` is the observed value just before the segment; it serves as
    /// the reference for the first direction but is not scored itself.
    pub fn compute(
        truth: &[f64],
        predicted: &[f64],
        anchor: Option<f64>,
    ) -> Result<Self, EvalError> {
        let m = mape(truth, predicted)?;
        let direction = match anchor {
            Some(a) => {
                let t: Vec<f64> = std::iter::once(a).chain(truth.iter().copied()).collect();
                let p: Vec<f64> = std::iter::once(a).chain(predicted.iter().copied()).collect();
                direction_accuracy(&t, &p)?
            }
            None => direction_accuracy(truth, predicted)?,
        };
        Ok(Self {
            n_points: truth.len(),
            mape: m.value,
            mape_excluded_zero: m.excluded_zero,
            direction_accuracy: direction,
        })
    }

    /// Number of scored direction steps.
    fn direction_steps(&self, anchored: bool) -> usize {
        if anchored {
            self.n_points
        } else {
            self.n_points.saturating_sub(1)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommunityMetrics {
    pub community_id: usize,
    pub train: SegmentMetrics,
    pub test: SegmentMetrics,
}

impl CommunityMetrics {
    /// Score one-step-ahead predictions. The test segment is anchored on the
    /// last observed value before its first point.
    pub fn from_predictions(
        community_id: usize,
        counts: &[f64],
        points: &[PredictedPoint],
    ) -> Result<Self, EvalError> {
        let split = |seg: Segment| -> (Vec<f64>, Vec<f64>, Option<usize>) {
            let sel: Vec<&PredictedPoint> = points.iter().filter(|p| p.segment == seg).collect();
            (
                sel.iter().map(|p| p.truth).collect(),
                sel.iter().map(|p| p.predicted).collect(),
                sel.first().map(|p| p.index),
            )
        };
        let (train_t, train_p, _) = split(Segment::Train);
        let (test_t, test_p, first) = split(Segment::Test);
        let anchor = first.and_then(|i| i.checked_sub(1)).map(|i| counts[i]);
        Ok(Self {
            community_id,
            train: SegmentMetrics::compute(&train_t, &train_p, None)?,
            test: SegmentMetrics::compute(&test_t, &test_p, anchor)?,
        })
    }
}

/// Means over communities weighted by the number of contributing points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub n_communities: usize,
    pub train_mape: Option<f64>,
    pub train_direction_accuracy: Option<f64>,
    pub test_mape: Option<f64>,
    pub test_direction_accuracy: Option<f64>,
}

pub fn aggregate(communities: &[CommunityMetrics]) -> Aggregate {
    fn weighted<'a>(items: impl Iterator<Item = (Option<f64>, usize)> + 'a) -> Option<f64> {
        let (mut sum, mut weight) = (0.0, 0usize);
        for (v, w) in items {
            if let Some(v) = v {
                sum += v * w as f64;
                weight += w;
            }
        }
        (weight > 0).then(|| sum / weight as f64)
    }
    let mape_w = |s: &SegmentMetrics| s.n_points - s.mape_excluded_zero;
    Aggregate {
        n_communities: communities.len(),
        train_mape: weighted(communities.iter().map(|c| (c.train.mape, mape_w(&c.train)))),
        train_direction_accuracy: weighted(
            communities
                .iter()
                .map(|c| (c.train.direction_accuracy, c.train.direction_steps(false))),
        ),
        test_mape: weighted(communities.iter().map(|c| (c.test.mape, mape_w(&c.test)))),
        test_direction_accuracy: weighted(
            communities
                .iter()
                .map(|c| (c.test.direction_accuracy, c.test.direction_steps(true))),
        ),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub communities: Vec<CommunityMetrics>,
    pub aggregate: Aggregate,
    #[serde(default)]
    pub config: BTreeMap<String, String>,
}

impl MetricReport {
    pub fn new(mut communities: Vec<CommunityMetrics>, config: BTreeMap<String, String>) -> Self {
        communities.sort_by_key(|c| c.community_id);
        let aggregate = aggregate(&communities);
        Self {
            communities,
            aggregate,
            config,
        }
    }

    pub fn write_json(&self, path: &Path) -> Result<(), EvalError> {
        let mut json = serde_json::to_string_pretty(self).map_err(|source| EvalError::Json {
            path: path.to_path_buf(),
            source,
        })?;
        json.push('\n');
        std::fs::write(path, json).map_err(|source| EvalError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    /// One row per community plus an `all` row; empty cells for undefined
    /// metrics.
    pub fn to_csv(&self) -> String {
        let cell = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
        let mut out = String::new();
        for (k, v) in &self.config {
            let _ = writeln!(out, "# {k} = {v}");
        }
        out.push_str(
            "community_id,n_train,n_test,train_mape,train_direction_accuracy,test_mape,test_direction_accuracy\n",
        );
        for c in &self.communities {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                c.community_id,
                c.train.n_points,
                c.test.n_points,
                cell(c.train.mape),
                cell(c.train.direction_accuracy),
                cell(c.test.mape),
                cell(c.test.direction_accuracy)
            );
        }
        let a = &self.aggregate;
        let _ = writeln!(
            out,
            "all,{},{},{},{},{},{}",
            self.communities.iter().map(|c| c.train.n_points).sum::<usize>(),
            self.communities.iter().map(|c| c.test.n_points).sum::<usize>(),
            cell(a.train_mape),
            cell(a.train_direction_accuracy),
            cell(a.test_mape),
            cell(a.test_direction_accuracy)
        );
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), EvalError> {
        std::fs::write(path, self.to_csv()).map_err(|source| EvalError::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}
