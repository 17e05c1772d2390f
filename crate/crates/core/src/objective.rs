//! Smooth training objectives and their gradients.
//!
//! Two objectives share the same constraint machinery:
//!
//! * the blind-AUC surrogate: pairwise logistic loss on
//!   `w·(x₊ − x) + ε_{x₊}` over every (positive, unlabeled) pair, plus ridge
//!   terms on `w` and `ε`;
//! * the error-minimization surrogate: a per-sample logistic objective with
//!   an intercept, prior-weighted linear term, and the same slack mechanism.
//!
//! Both come in full-batch form and in a stochastic form that samples one
//! unlabeled row; averaging the stochastic gradient over all rows reproduces
//! the full gradient exactly, not just in expectation.

use ndarray::{Array1, Array2};

use crate::dataset::PUDataset;
use crate::error::{Error, Result};

/// `log(1 + exp(z))` in the overflow-safe form `max(z, 0) + log1p(exp(-|z|))`.
pub fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Logistic sigmoid, evaluated without overflow for any finite input.
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Regularization weights for the blind-AUC objective.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BaucOfParams {
    /// Ridge weight on the outlier slack.
    pub alpha: f64,
    /// Ridge weight on the feature weights.
    pub beta: f64,
}

impl BaucOfParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha >= 0.0 && beta.is_finite() && beta >= 0.0) {
            return Err(Error::invalid(format!(
                "regularization weights must be finite and nonnegative, got alpha={alpha}, beta={beta}"
            )));
        }
        Ok(BaucOfParams { alpha, beta })
    }
}

impl Default for BaucOfParams {
    fn default() -> Self {
        BaucOfParams {
            alpha: 1e-3,
            beta: 1e-3,
        }
    }
}

/// Regularization weights plus the class prior for the error-minimization
/// objective. The prior must be supplied by the caller; no estimation is
/// built in.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ErrOfParams {
    pub alpha: f64,
    pub beta: f64,
    /// Fraction of positives in the unlabeled population, strictly in (0, 1).
    pub pi: f64,
}

impl ErrOfParams {
    pub fn new(alpha: f64, beta: f64, pi: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha >= 0.0 && beta.is_finite() && beta >= 0.0) {
            return Err(Error::invalid(format!(
                "regularization weights must be finite and nonnegative, got alpha={alpha}, beta={beta}"
            )));
        }
        if !(pi > 0.0 && pi < 1.0) {
            return Err(Error::invalid(format!(
                "class prior must lie strictly inside (0, 1), got {pi}"
            )));
        }
        Ok(ErrOfParams { alpha, beta, pi })
    }
}

/// Gradient of either objective with respect to the model variables.
#[derive(Clone, Debug)]
pub struct Gradient {
    pub d_weights: Array1<f64>,
    pub d_slack: Array1<f64>,
    pub d_intercept: Option<f64>,
}

fn check_dims(w: &Array1<f64>, slack: &Array1<f64>, data: &PUDataset) -> Result<()> {
    if w.len() != data.dim() {
        return Err(Error::DimensionMismatch {
            expected: data.dim(),
            actual: w.len(),
        });
    }
    if slack.len() != data.n_pos() {
        return Err(Error::DimensionMismatch {
            expected: data.n_pos(),
            actual: slack.len(),
        });
    }
    Ok(())
}

fn scores(m: &Array2<f64>, w: &Array1<f64>) -> Array1<f64> {
    m.dot(w)
}

/// Pairwise logistic loss for one (positive, unlabeled) pair:
/// `softplus(-(w·(x_pos − x_unl) + slack))`.
pub fn pair_loss(w: &[f64], slack: f64, x_pos: &[f64], x_unl: &[f64]) -> f64 {
    debug_assert_eq!(w.len(), x_pos.len());
    debug_assert_eq!(w.len(), x_unl.len());
    let mut margin = slack;
    for ((&wi, &p), &u) in w.iter().zip(x_pos).zip(x_unl) {
        margin += wi * (p - u);
    }
    softplus(-margin)
}

/// Full-batch value of the blind-AUC objective:
/// `α/2 ‖ε‖² + β/2 ‖w‖² + mean over all pairs of the pairwise loss`.
pub fn bauc_of_value(
    w: &Array1<f64>,
    slack: &Array1<f64>,
    data: &PUDataset,
    params: &BaucOfParams,
) -> Result<f64> {
    check_dims(w, slack, data)?;
    let pos_scores = scores(data.positives(), w);
    let unl_scores = scores(data.unlabeled(), w);
    let mut pair_sum = 0.0;
    for (&ps, &e) in pos_scores.iter().zip(slack.iter()) {
        for &us in unl_scores.iter() {
            pair_sum += softplus(-(ps - us + e));
        }
    }
    let n_pairs = (data.n_pos() * data.n_unlabeled()) as f64;
    let reg = 0.5 * params.alpha * slack.dot(slack) + 0.5 * params.beta * w.dot(w);
    Ok(reg + pair_sum / n_pairs)
}

/// Exact full-batch gradient of [`bauc_of_value`].
pub fn bauc_of_grad_full(
    w: &Array1<f64>,
    slack: &Array1<f64>,
    data: &PUDataset,
    params: &BaucOfParams,
) -> Result<Gradient> {
    check_dims(w, slack, data)?;
    let pos_scores = scores(data.positives(), w);
    let unl_scores = scores(data.unlabeled(), w);
    let n_pairs = (data.n_pos() * data.n_unlabeled()) as f64;

    // sigma_ij = σ(-(z_ij)); d/dw of softplus(-z) is -sigma (x₊ − x).
    let mut row_sigma = Array1::<f64>::zeros(data.n_pos());
    let mut col_sigma = Array1::<f64>::zeros(data.n_unlabeled());
    for (i, (&ps, &e)) in pos_scores.iter().zip(slack.iter()).enumerate() {
        for (j, &us) in unl_scores.iter().enumerate() {
            let s = sigmoid(-(ps - us + e));
            row_sigma[i] += s;
            col_sigma[j] += s;
        }
    }
    let mut d_weights = data.positives().t().dot(&row_sigma);
    d_weights -= &data.unlabeled().t().dot(&col_sigma);
    d_weights.mapv_inplace(|v| -v / n_pairs);
    d_weights += &(params.beta * w);

    let mut d_slack = row_sigma;
    d_slack.mapv_inplace(|v| -v / n_pairs);
    d_slack += &(params.alpha * slack);

    Ok(Gradient {
        d_weights,
        d_slack,
        d_intercept: None,
    })
}

/// Stochastic gradient of the blind-AUC objective from a single sampled
/// unlabeled row. The average over all rows equals [`bauc_of_grad_full`]
/// exactly.
pub fn bauc_of_grad_stoch(
    w: &Array1<f64>,
    slack: &Array1<f64>,
    data: &PUDataset,
    params: &BaucOfParams,
    unlabeled_index: usize,
) -> Result<Gradient> {
    check_dims(w, slack, data)?;
    if unlabeled_index >= data.n_unlabeled() {
        return Err(Error::invalid(format!(
            "unlabeled index {unlabeled_index} out of range for {} rows",
            data.n_unlabeled()
        )));
    }
    let x = data.unlabeled().row(unlabeled_index);
    let pos_scores = scores(data.positives(), w);
    let us = x.dot(w);
    let n_pos = data.n_pos() as f64;

    let mut sigma = Array1::<f64>::zeros(data.n_pos());
    for (s, (&ps, &e)) in sigma.iter_mut().zip(pos_scores.iter().zip(slack.iter())) {
        *s = sigmoid(-(ps - us + e));
    }
    let sigma_sum: f64 = sigma.sum();

    let mut d_weights = data.positives().t().dot(&sigma);
    d_weights.scaled_add(-sigma_sum, &x.to_owned());
    d_weights.mapv_inplace(|v| -v / n_pos);
    d_weights += &(params.beta * w);

    let mut d_slack = sigma;
    d_slack.mapv_inplace(|v| -v / n_pos);
    d_slack += &(params.alpha * slack);

    Ok(Gradient {
        d_weights,
        d_slack,
        d_intercept: None,
    })
}

/// Full-batch value of the error-minimization objective with intercept and
/// outlier slack.
pub fn err_of_value(
    w: &Array1<f64>,
    intercept: f64,
    slack: &Array1<f64>,
    data: &PUDataset,
    params: &ErrOfParams,
) -> Result<f64> {
    check_dims(w, slack, data)?;
    let pos_scores = scores(data.positives(), w);
    let unl_scores = scores(data.unlabeled(), w);
    let n_pos = data.n_pos() as f64;
    let n_unl = data.n_unlabeled() as f64;

    let mut linear = 0.0;
    let mut pos_softplus = 0.0;
    for (&ps, &e) in pos_scores.iter().zip(slack.iter()) {
        linear += ps + intercept - e;
        pos_softplus += softplus(e + intercept - ps);
    }
    let mut unl_softplus = 0.0;
    for &us in unl_scores.iter() {
        unl_softplus += softplus(intercept - us);
    }
    let reg = 0.5 * params.beta * w.dot(w) + 0.5 * params.alpha * slack.dot(slack);
    Ok(reg + params.pi * linear / n_pos + pos_softplus / n_pos + unl_softplus / n_unl)
}

/// Exact gradient of [`err_of_value`]; `d_intercept` is always present.
pub fn err_of_grad(
    w: &Array1<f64>,
    intercept: f64,
    slack: &Array1<f64>,
    data: &PUDataset,
    params: &ErrOfParams,
) -> Result<Gradient> {
    check_dims(w, slack, data)?;
    let pos_scores = scores(data.positives(), w);
    let unl_scores = scores(data.unlabeled(), w);
    let n_pos = data.n_pos() as f64;
    let n_unl = data.n_unlabeled() as f64;

    // positive-side terms
    let mut sigma_pos = Array1::<f64>::zeros(data.n_pos());
    for (s, (&ps, &e)) in sigma_pos
        .iter_mut()
        .zip(pos_scores.iter().zip(slack.iter()))
    {
        *s = sigmoid(e + intercept - ps);
    }
    let sigma_pos_mean = sigma_pos.sum() / n_pos;

    // unlabeled-side terms
    let mut sigma_unl = Array1::<f64>::zeros(data.n_unlabeled());
    for (s, &us) in sigma_unl.iter_mut().zip(unl_scores.iter()) {
        *s = sigmoid(intercept - us);
    }

    let pos_mean = data.positives().t().dot(&Array1::from_elem(data.n_pos(), 1.0 / n_pos));
    let mut d_weights = &pos_mean * params.pi;
    d_weights -= &(data.positives().t().dot(&sigma_pos) / n_pos);
    d_weights -= &(data.unlabeled().t().dot(&sigma_unl) / n_unl);
    d_weights += &(params.beta * w);

    let mut d_slack = sigma_pos.clone();
    d_slack.mapv_inplace(|s| (s - params.pi) / n_pos);
    d_slack += &(params.alpha * slack);

    let d_intercept = params.pi + sigma_pos_mean + sigma_unl.sum() / n_unl;

    Ok(Gradient {
        d_weights,
        d_slack,
        d_intercept: Some(d_intercept),
    })
}

/// Stochastic gradient of the error objective: the positive-set terms are
/// cheap and kept exact; the unlabeled mean is replaced by the single
/// sampled row. The average over all rows equals [`err_of_grad`] exactly.
pub fn err_of_grad_stoch(
    w: &Array1<f64>,
    intercept: f64,
    slack: &Array1<f64>,
    data: &PUDataset,
    params: &ErrOfParams,
    unlabeled_index: usize,
) -> Result<Gradient> {
    check_dims(w, slack, data)?;
    if unlabeled_index >= data.n_unlabeled() {
        return Err(Error::invalid(format!(
            "unlabeled index {unlabeled_index} out of range for {} rows",
            data.n_unlabeled()
        )));
    }
    let pos_scores = scores(data.positives(), w);
    let n_pos = data.n_pos() as f64;
    let x = data.unlabeled().row(unlabeled_index);
    let sigma_u = sigmoid(intercept - x.dot(w));

    let mut sigma_pos = Array1::<f64>::zeros(data.n_pos());
    for (s, (&ps, &e)) in sigma_pos
        .iter_mut()
        .zip(pos_scores.iter().zip(slack.iter()))
    {
        *s = sigmoid(e + intercept - ps);
    }
    let sigma_pos_mean = sigma_pos.sum() / n_pos;

    let pos_mean = data.positives().t().dot(&Array1::from_elem(data.n_pos(), 1.0 / n_pos));
    let mut d_weights = &pos_mean * params.pi;
    d_weights -= &(data.positives().t().dot(&sigma_pos) / n_pos);
    d_weights.scaled_add(-sigma_u, &x.to_owned());
    d_weights += &(params.beta * w);

    let mut d_slack = sigma_pos;
    d_slack.mapv_inplace(|s| (s - params.pi) / n_pos);
    d_slack += &(params.alpha * slack);

    let d_intercept = params.pi + sigma_pos_mean + sigma_u;

    Ok(Gradient {
        d_weights,
        d_slack,
        d_intercept: Some(d_intercept),
    })
}
