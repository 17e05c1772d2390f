//! Projected gradient training.
//!
//! In the default stochastic mode each epoch visits every unlabeled row once
//! in a seeded shuffled order; each visit takes one stochastic gradient step
//! and then projects the weights onto the sparsity hypothesis and the slack
//! onto its ℓ0 budget. The full-batch mode takes one exact-gradient step per
//! epoch with the same projections; the hard-thresholding steps then act on
//! the averaged pair signal instead of single-sample noise, which is what
//! the feature-selection and outlier budgets need on small dense problems.
//! Runs are bit-reproducible given (seed, config, data) in either mode.

use ndarray::Array1;
use serde::{Deserialize, Serialize};

use crate::dataset::{PUDataset, Standardizer};
use crate::error::{Error, Result};
use crate::hypothesis::SparsityHypothesis;
use crate::metrics::empirical_bauc;
use crate::model::{Model, ObjectiveKind};
use crate::objective::{
    bauc_of_grad_full, bauc_of_grad_stoch, bauc_of_value, err_of_grad, err_of_grad_stoch,
    err_of_value, BaucOfParams, ErrOfParams, Gradient,
};
use crate::project;
use crate::rng::SplitMix64;

/// Objective selector carrying its own parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Objective {
    BaucOf(BaucOfParams),
    ErrOf(ErrOfParams),
}

impl Objective {
    pub fn kind(&self) -> ObjectiveKind {
        match self {
            Objective::BaucOf(_) => ObjectiveKind::BaucOf,
            Objective::ErrOf(_) => ObjectiveKind::ErrOf,
        }
    }
}

/// Learning-rate schedule. `InverseSqrt` decays per step `k` as
/// `lr / sqrt(1 + k/m)` where `m` is the number of steps per epoch, i.e. by
/// roughly `1/sqrt(epoch)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LrDecay {
    Constant,
    InverseSqrt,
}

/// Which gradient each projected step uses.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum GradientMode {
    /// One step per sampled unlabeled row; an epoch is a shuffled pass over
    /// all rows.
    #[default]
    Stochastic,
    /// One exact-gradient step per epoch.
    FullBatch,
}

/// Everything that defines one training run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrainConfig {
    pub objective: Objective,
    pub hypothesis: SparsityHypothesis,
    /// Maximum number of nonzero slack entries (outlier budget `t`).
    pub outlier_budget: usize,
    pub learning_rate: f64,
    pub lr_decay: LrDecay,
    pub epochs: usize,
    /// Stop when the relative change of the full-batch objective between
    /// epochs falls below this.
    pub tol: f64,
    pub seed: u64,
    /// Standardize features (union of all training rows) before fitting; the
    /// fitted transform is stored on the model and replayed at predict time.
    pub standardize: bool,
    pub gradient_mode: GradientMode,
}

impl TrainConfig {
    pub fn new(objective: Objective, hypothesis: SparsityHypothesis) -> Self {
        TrainConfig {
            objective,
            hypothesis,
            outlier_budget: 0,
            learning_rate: 0.1,
            lr_decay: LrDecay::InverseSqrt,
            epochs: 200,
            tol: 1e-6,
            seed: 0,
            standardize: false,
            gradient_mode: GradientMode::Stochastic,
        }
    }

    fn validate(&self, data: &PUDataset) -> Result<()> {
        if self.hypothesis.dim() != data.dim() {
            return Err(Error::DimensionMismatch {
                expected: data.dim(),
                actual: self.hypothesis.dim(),
            });
        }
        self.hypothesis.validate()?;
        if self.outlier_budget > data.n_pos() {
            return Err(Error::invalid(format!(
                "outlier budget {} exceeds the {} labeled positives",
                self.outlier_budget,
                data.n_pos()
            )));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::invalid(format!(
                "learning rate must be finite and positive, got {}",
                self.learning_rate
            )));
        }
        if self.epochs == 0 {
            return Err(Error::invalid("epochs must be at least 1"));
        }
        if !(self.tol.is_finite() && self.tol >= 0.0) {
            return Err(Error::invalid(format!(
                "tolerance must be finite and nonnegative, got {}",
                self.tol
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    MaxEpochs,
    TolReached,
}

/// Per-epoch diagnostics from a training run.
#[derive(Clone, Debug)]
pub struct TrainTrace {
    /// Full-batch objective after each epoch.
    pub objective_values: Vec<f64>,
    /// Empirical blind AUC on the training data after each epoch.
    pub train_bauc: Vec<f64>,
    pub epochs_run: usize,
    pub stop: StopReason,
}

/// Fits a model by projected (stochastic) gradient descent.
///
/// Starts from `w = 0`, `ε = 0`, `b = 0` (the zero point lies in every
/// constraint set); every iterate and the returned model satisfy both
/// constraints exactly.
pub fn psg_fit(data: &PUDataset, config: &TrainConfig) -> Result<(Model, TrainTrace)> {
    config.validate(data)?;

    // standardize a private copy when asked; the raw input is untouched
    let (data, standardizer) = if config.standardize {
        let st = Standardizer::fit(&[data.positives(), data.unlabeled()])?;
        let mut pos = data.positives().clone();
        let mut unl = data.unlabeled().clone();
        st.transform_in_place(&mut pos)?;
        st.transform_in_place(&mut unl)?;
        let owned = PUDataset::new(pos, unl, data.feature_names().map(|n| n.to_vec()))?;
        (std::borrow::Cow::Owned(owned), Some(st))
    } else {
        (std::borrow::Cow::Borrowed(data), None)
    };
    let data = data.as_ref();

    let dim = data.dim();
    let n_pos = data.n_pos();
    let n_unl = data.n_unlabeled();
    let mut w = Array1::<f64>::zeros(dim);
    let mut slack = Array1::<f64>::zeros(n_pos);
    let mut intercept = 0.0f64;
    let uses_intercept = matches!(config.objective, Objective::ErrOf(_));

    let mut rng = SplitMix64::new(config.seed);
    let mut order: Vec<usize> = (0..n_unl).collect();
    let steps_per_epoch = match config.gradient_mode {
        GradientMode::Stochastic => n_unl,
        GradientMode::FullBatch => 1,
    };
    let mut step = 0usize;

    let mut objective_values = Vec::with_capacity(config.epochs);
    let mut train_bauc = Vec::with_capacity(config.epochs);
    let mut stop = StopReason::MaxEpochs;
    let mut epochs_run = 0usize;

    for epoch in 0..config.epochs {
        let mut take_step = |w: &mut Array1<f64>,
                             slack: &mut Array1<f64>,
                             intercept: &mut f64,
                             g: Gradient,
                             step: &mut usize| {
            let lr = match config.lr_decay {
                LrDecay::Constant => config.learning_rate,
                LrDecay::InverseSqrt => {
                    config.learning_rate / (1.0 + *step as f64 / steps_per_epoch as f64).sqrt()
                }
            };
            w.scaled_add(-lr, &g.d_weights);
            slack.scaled_add(-lr, &g.d_slack);
            if let Some(db) = g.d_intercept {
                *intercept -= lr * db;
            }
            project::hypothesis_in_place(w.as_slice_mut().unwrap(), &config.hypothesis);
            project::l0_in_place(slack.as_slice_mut().unwrap(), config.outlier_budget);
            *step += 1;
        };

        match config.gradient_mode {
            GradientMode::Stochastic => {
                rng.shuffle(&mut order);
                for &j in &order {
                    let g = match &config.objective {
                        Objective::BaucOf(params) => {
                            bauc_of_grad_stoch(&w, &slack, data, params, j)?
                        }
                        Objective::ErrOf(params) => {
                            err_of_grad_stoch(&w, intercept, &slack, data, params, j)?
                        }
                    };
                    take_step(&mut w, &mut slack, &mut intercept, g, &mut step);
                    if !(w.iter().all(|v| v.is_finite())
                        && slack.iter().all(|v| v.is_finite())
                        && intercept.is_finite())
                    {
                        return Err(Error::NonFinite { epoch, step });
                    }
                }
            }
            GradientMode::FullBatch => {
                let g = match &config.objective {
                    Objective::BaucOf(params) => bauc_of_grad_full(&w, &slack, data, params)?,
                    Objective::ErrOf(params) => {
                        err_of_grad(&w, intercept, &slack, data, params)?
                    }
                };
                take_step(&mut w, &mut slack, &mut intercept, g, &mut step);
                if !(w.iter().all(|v| v.is_finite())
                    && slack.iter().all(|v| v.is_finite())
                    && intercept.is_finite())
                {
                    return Err(Error::NonFinite { epoch, step });
                }
            }
        }
        debug_assert!(config.hypothesis.contains(w.as_slice().unwrap()).unwrap());
        debug_assert!(
            slack.iter().filter(|&&e| e != 0.0).count() <= config.outlier_budget,
            "slack violates its budget"
        );

        let objective = match &config.objective {
            Objective::BaucOf(params) => bauc_of_value(&w, &slack, data, params)?,
            Objective::ErrOf(params) => err_of_value(&w, intercept, &slack, data, params)?,
        };
        if !objective.is_finite() {
            return Err(Error::NonFinite { epoch, step });
        }
        objective_values.push(objective);
        epochs_run = epoch + 1;

        let snapshot = Model {
            weights: w.clone(),
            slack: slack.clone(),
            intercept: uses_intercept.then_some(intercept),
            hypothesis: config.hypothesis.clone(),
            objective_kind: config.objective.kind(),
            standardizer: None, // data is already transformed here
        };
        train_bauc.push(empirical_bauc(&snapshot, data)?);

        if epoch > 0 {
            let prev = objective_values[epoch - 1];
            let rel = (prev - objective).abs() / prev.abs().max(f64::EPSILON);
            if rel < config.tol {
                stop = StopReason::TolReached;
                break;
            }
        }
    }

    let model = Model {
        weights: w,
        slack,
        intercept: uses_intercept.then_some(intercept),
        hypothesis: config.hypothesis.clone(),
        objective_kind: config.objective.kind(),
        standardizer,
    };
    let trace = TrainTrace {
        objective_values,
        train_bauc,
        epochs_run,
        stop,
    };
    Ok((model, trace))
}

/// Row indices (0-based) of the labeled positives flagged as outliers: the
/// positions where the fitted slack is nonzero.
pub fn detect_outliers(model: &Model) -> Vec<usize> {
    model.outlier_indices()
}

/// Options for [`greedy_tune`].
#[derive(Clone, Copy, Debug)]
pub struct TuneOptions {
    /// A grid step is accepted only when it improves the evaluation BAUC by
    /// more than this.
    pub min_improvement: f64,
    /// Evaluate candidates on the training data instead of the holdout.
    pub score_on_train: bool,
}

impl Default for TuneOptions {
    fn default() -> Self {
        TuneOptions {
            min_improvement: 1e-3,
            score_on_train: false,
        }
    }
}

/// Greedy hyperparameter search over the sparsity budget `s` and the outlier
/// budget `t`: starting from the smallest grid values, alternately tries the
/// next `s` step then the next `t` step, accepting a step only when the
/// evaluation BAUC improves by more than `min_improvement`, and stops when
/// neither parameter's next step improves.
///
/// `s` is swept only for a plain-ℓ0 base hypothesis; for group or exclusive
/// hypotheses the `s_grid` is ignored (with a warning) and only `t` is tuned.
pub fn greedy_tune(
    data: &PUDataset,
    holdout: &PUDataset,
    base: &TrainConfig,
    t_grid: &[usize],
    s_grid: &[usize],
    opts: TuneOptions,
) -> Result<TrainConfig> {
    if t_grid.is_empty() || s_grid.is_empty() {
        return Err(Error::invalid("tuning grids must be nonempty"));
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) || s_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("tuning grids must be strictly ascending"));
    }
    let sweep_s = matches!(base.hypothesis, SparsityHypothesis::PlainL0 { .. });
    if !sweep_s {
        log::warn!("greedy tuning sweeps the sparsity budget only for plain-l0 hypotheses; ignoring the s grid");
    }
    let dim = data.dim();

    let make_config = |s: usize, t: usize| -> Result<TrainConfig> {
        let mut cfg = base.clone();
        cfg.outlier_budget = t;
        if sweep_s {
            cfg.hypothesis = SparsityHypothesis::plain_l0(dim, s.min(dim))?;
        }
        Ok(cfg)
    };
    let evaluate = |s: usize, t: usize| -> Result<f64> {
        let cfg = make_config(s, t)?;
        let (model, _) = psg_fit(data, &cfg)?;
        let eval_data = if opts.score_on_train { data } else { holdout };
        empirical_bauc(&model, eval_data)
    };

    let mut s_idx = 0usize;
    let mut t_idx = 0usize;
    let mut best = evaluate(s_grid[s_idx], t_grid[t_idx])?;
    loop {
        let mut improved = false;
        if sweep_s && s_idx + 1 < s_grid.len() {
            let candidate = evaluate(s_grid[s_idx + 1], t_grid[t_idx])?;
            if candidate > best + opts.min_improvement {
                s_idx += 1;
                best = candidate;
                improved = true;
            }
        }
        if t_idx + 1 < t_grid.len() {
            let candidate = evaluate(s_grid[s_idx], t_grid[t_idx + 1])?;
            if candidate > best + opts.min_improvement {
                t_idx += 1;
                best = candidate;
                improved = true;
            }
        }
        if !improved {
            break;
        }
    }
    make_config(s_grid[s_idx], t_grid[t_idx])
}
