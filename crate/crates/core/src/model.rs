//! Trained linear scoring model with per-positive outlier slack.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::dataset::Standardizer;
use crate::error::{Error, Result};
use crate::hypothesis::SparsityHypothesis;

/// Which objective the model was trained under.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ObjectiveKind {
    BaucOf,
    ErrOf,
}

impl std::fmt::Display for ObjectiveKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ObjectiveKind::BaucOf => write!(f, "bauc-of"),
            ObjectiveKind::ErrOf => write!(f, "err-of"),
        }
    }
}

/// Linear scoring model `f(x) = w·x (+ b)` plus the outlier slack vector
/// fitted alongside it. The slack has one entry per labeled-positive
/// training row, in row order; its nonzero entries flag detected outliers.
#[derive(Clone, Debug)]
pub struct Model {
    pub weights: Array1<f64>,
    pub slack: Array1<f64>,
    /// Intercept, present only for error-minimization models.
    pub intercept: Option<f64>,
    pub hypothesis: SparsityHypothesis,
    pub objective_kind: ObjectiveKind,
    /// Feature transform fitted at training time, replayed before scoring.
    pub standardizer: Option<Standardizer>,
}

impl Model {
    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    /// Scores each row of `features`: standardizes if the model was trained
    /// on standardized data, then applies `w·x (+ b)`.
    pub fn score(&self, features: &Array2<f64>) -> Result<Array1<f64>> {
        if features.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: features.ncols(),
            });
        }
        let b = self.intercept.unwrap_or(0.0);
        let w = self
            .weights
            .as_slice()
            .expect("weights are contiguous");
        let mut scores = Array1::zeros(features.nrows());
        for (out, row) in scores.iter_mut().zip(features.rows()) {
            let mut acc = 0.0;
            match &self.standardizer {
                None => {
                    for (&wi, &xi) in w.iter().zip(row.iter()) {
                        acc += wi * xi;
                    }
                }
                Some(st) => {
                    for ((&wi, &xi), (&mu, &sd)) in w
                        .iter()
                        .zip(row.iter())
                        .zip(st.mean.iter().zip(st.sd.iter()))
                    {
                        acc += wi * ((xi - mu) / sd);
                    }
                }
            }
            *out = acc + b;
        }
        Ok(scores)
    }

    /// Row indices (0-based, into the positive training set) whose slack is
    /// nonzero — the detected outliers. Sorted ascending.
    pub fn outlier_indices(&self) -> Vec<usize> {
        self.slack
            .iter()
            .enumerate()
            .filter(|(_, &e)| e != 0.0)
            .map(|(i, _)| i)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn model(w: Vec<f64>, b: Option<f64>) -> Model {
        let dim = w.len();
        Model {
            weights: Array1::from(w),
            slack: Array1::zeros(1),
            intercept: b,
            hypothesis: SparsityHypothesis::full_support(dim),
            objective_kind: if b.is_some() {
                ObjectiveKind::ErrOf
            } else {
                ObjectiveKind::BaucOf
            },
            standardizer: None,
        }
    }

    #[test]
    fn score_is_a_dot_product() {
        let m = model(vec![1.0, 2.0], None);
        let s = m.score(&array![[3.0, 4.0]]).unwrap();
        assert_eq!(s[0], 11.0);
    }

    #[test]
    fn zero_weights_score_zero() {
        let m = model(vec![0.0, 0.0, 0.0], None);
        let s = m.score(&array![[1.0, -5.0, 9.0], [2.0, 2.0, 2.0]]).unwrap();
        assert!(s.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn intercept_is_added() {
        let m = model(vec![1.0, 0.0, -1.0], Some(0.5));
        let s = m.score(&array![[2.0, 9.0, 1.0]]).unwrap();
        assert_eq!(s[0], 1.5);
    }

    #[test]
    fn dimension_mismatch_names_both_sizes() {
        let m = model(vec![1.0, 2.0], None);
        let err = m.score(&array![[1.0, 2.0, 3.0]]).unwrap_err().to_string();
        assert!(err.contains('2') && err.contains('3'), "{err}");
    }

    #[test]
    fn outlier_indices_are_nonzero_slack_positions() {
        let mut m = model(vec![1.0], None);
        m.slack = array![0.0, -2.1, 0.0, 0.3];
        assert_eq!(m.outlier_indices(), vec![1, 3]);
        m.slack = Array1::zeros(4);
        assert!(m.outlier_indices().is_empty());
    }
}
