//! Positive-unlabeled classification by blind-AUC maximization, with
//! simultaneous outlier detection (ℓ0-budgeted per-positive slack) and
//! feature selection (plain, group, or exclusive sparsity), trained by
//! projected stochastic gradient descent. Includes the error-minimization
//! counterpart, a synthetic two-Gaussian benchmark generator, and an
//! experiment harness with a CLI.

pub mod cli;
pub mod datagen;
pub mod dataset;
pub mod error;
pub mod experiments;
pub mod hypothesis;
pub mod io;
pub mod metrics;
pub mod model;
pub mod objective;
pub mod project;
pub mod rng;
pub mod solver;

pub use dataset::{LabeledDataset, PUDataset, Standardizer};
pub use error::{Error, Result};
pub use hypothesis::{GroupPartition, SparsityHypothesis};
pub use metrics::{
    auc_from_bauc, decompose_bauc, empirical_auc, empirical_bauc, roc_curve, RocCurve,
};
pub use model::{Model, ObjectiveKind};
pub use objective::{BaucOfParams, ErrOfParams, Gradient};
pub use project::{project_exclusive, project_group_l0, project_l0, ProjectionReport};
pub use solver::{
    detect_outliers, greedy_tune, psg_fit, GradientMode, LrDecay, Objective, StopReason,
    TrainConfig, TrainTrace, TuneOptions,
};
