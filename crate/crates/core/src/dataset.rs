//! Training and evaluation dataset containers.
//!
//! [`PUDataset`] is the training view of the world: a matrix of samples
//! labeled positive plus a matrix of unlabeled samples of the same width.
//! [`LabeledDataset`] carries ground-truth `±1` labels and is used for
//! evaluation and for constructing PU views of fully labeled data.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn check_finite(name: &str, m: &Array2<f64>) -> Result<()> {
    if let Some(((r, c), v)) = m.indexed_iter().find(|(_, v)| !v.is_finite()) {
        return Err(Error::invalid(format!(
            "{name} contains non-finite value {v} at row {}, column {}",
            r + 1,
            c + 1
        )));
    }
    Ok(())
}

/// Positive-unlabeled training data: `n_pos x dim` positives and
/// `n_unlabeled x dim` unlabeled samples.
#[derive(Clone, Debug)]
pub struct PUDataset {
    positives: Array2<f64>,
    unlabeled: Array2<f64>,
    feature_names: Option<Vec<String>>,
}

impl PUDataset {
    pub fn new(
        positives: Array2<f64>,
        unlabeled: Array2<f64>,
        feature_names: Option<Vec<String>>,
    ) -> Result<Self> {
        if positives.nrows() == 0 {
            return Err(Error::invalid("positive set is empty"));
        }
        if unlabeled.nrows() == 0 {
            return Err(Error::invalid("unlabeled set is empty"));
        }
        if positives.ncols() != unlabeled.ncols() {
            return Err(Error::invalid(format!(
                "positives have {} columns but unlabeled has {}",
                positives.ncols(),
                unlabeled.ncols()
            )));
        }
        check_finite("positives", &positives)?;
        check_finite("unlabeled", &unlabeled)?;
        if let Some(names) = &feature_names {
            if names.len() != positives.ncols() {
                return Err(Error::invalid(format!(
                    "{} feature names for {} columns",
                    names.len(),
                    positives.ncols()
                )));
            }
        }
        Ok(PUDataset {
            positives,
            unlabeled,
            feature_names,
        })
    }

    pub fn positives(&self) -> &Array2<f64> {
        &self.positives
    }

    pub fn unlabeled(&self) -> &Array2<f64> {
        &self.unlabeled
    }

    pub fn feature_names(&self) -> Option<&[String]> {
        self.feature_names.as_deref()
    }

    /// Number of labeled-positive samples.
    pub fn n_pos(&self) -> usize {
        self.positives.nrows()
    }

    /// Number of unlabeled samples.
    pub fn n_unlabeled(&self) -> usize {
        self.unlabeled.nrows()
    }

    pub fn dim(&self) -> usize {
        self.positives.ncols()
    }
}

/// Fully labeled data with labels in `{+1, -1}`.
#[derive(Clone, Debug)]
pub struct LabeledDataset {
    features: Array2<f64>,
    labels: Vec<i8>,
}

impl LabeledDataset {
    pub fn new(features: Array2<f64>, labels: Vec<i8>) -> Result<Self> {
        if features.nrows() != labels.len() {
            return Err(Error::invalid(format!(
                "{} feature rows but {} labels",
                features.nrows(),
                labels.len()
            )));
        }
        if let Some((i, l)) = labels.iter().enumerate().find(|(_, l)| !matches!(l, 1 | -1)) {
            return Err(Error::invalid(format!(
                "label {l} at row {} is not +1 or -1",
                i + 1
            )));
        }
        check_finite("features", &features)?;
        Ok(LabeledDataset { features, labels })
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn labels(&self) -> &[i8] {
        &self.labels
    }

    pub fn n_samples(&self) -> usize {
        self.labels.len()
    }

    pub fn dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn n_positive(&self) -> usize {
        self.labels.iter().filter(|&&l| l == 1).count()
    }

    pub fn n_negative(&self) -> usize {
        self.labels.iter().filter(|&&l| l == -1).count()
    }
}

/// Per-column z-score transform fitted on the union of all training rows and
/// replayed at prediction time. Columns with zero spread are left unscaled.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
}

impl Standardizer {
    /// Fits column means and standard deviations over all rows of all given
    /// matrices (population standard deviation).
    pub fn fit(matrices: &[&Array2<f64>]) -> Result<Self> {
        let dim = matrices
            .first()
            .ok_or_else(|| Error::invalid("no matrices to standardize"))?
            .ncols();
        let total_rows: usize = matrices.iter().map(|m| m.nrows()).sum();
        if total_rows == 0 {
            return Err(Error::invalid("no rows to standardize"));
        }
        let mut mean = vec![0.0; dim];
        for m in matrices {
            if m.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: m.ncols(),
                });
            }
            for row in m.rows() {
                for (acc, &v) in mean.iter_mut().zip(row.iter()) {
                    *acc += v;
                }
            }
        }
        for acc in &mut mean {
            *acc /= total_rows as f64;
        }
        let mut var = vec![0.0; dim];
        for m in matrices {
            for row in m.rows() {
                for ((acc, &v), &mu) in var.iter_mut().zip(row.iter()).zip(mean.iter()) {
                    let d = v - mu;
                    *acc += d * d;
                }
            }
        }
        let sd = var
            .into_iter()
            .map(|v| {
                let s = (v / total_rows as f64).sqrt();
                if s > 0.0 {
                    s
                } else {
                    1.0
                }
            })
            .collect();
        Ok(Standardizer { mean, sd })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn transform_in_place(&self, m: &mut Array2<f64>) -> Result<()> {
        if m.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: m.ncols(),
            });
        }
        for mut row in m.rows_mut() {
            for ((v, &mu), &s) in row.iter_mut().zip(self.mean.iter()).zip(self.sd.iter()) {
                *v = (*v - mu) / s;
            }
        }
        Ok(())
    }
}
