//! Synthetic two-Gaussian benchmarks with planted ground truth.
//!
//! Relevant features of positives and negatives are drawn from
//! `N(+mean_rel, sd_rel²)` and `N(-mean_rel, sd_rel²)`; irrelevant features
//! from `N(0, sd_irrel²)` for every sample. Mislabeled positives (outliers)
//! have every feature drawn from `N(outlier_mean, outlier_sd²)` and are
//! appended to the labeled-positive block, so their row indices are the last
//! `n_outliers` positions. Relevant features occupy the first `relevant`
//! columns unless `permute_columns` is set.
//!
//! Generation is a pure function of the spec: one SplitMix64 stream, drawn
//! in a fixed documented order (clean positives, outliers, unlabeled
//! positives, unlabeled negatives, unlabeled shuffle, test positives, test
//! negatives, optional column permutation).

use ndarray::Array2;

use crate::dataset::{LabeledDataset, PUDataset};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, SplitMix64};

/// Parameters of one synthetic benchmark draw.
#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticSpec {
    /// Total number of features `p`.
    pub dim: usize,
    /// Number of relevant features (the planted support size).
    pub relevant: usize,
    /// Labeled positives, outliers included.
    pub n_pos_labeled: usize,
    pub n_unlabeled: usize,
    /// True positives hidden inside the unlabeled set.
    pub n_unlabeled_pos: usize,
    /// Mislabeled positives injected into the labeled-positive block.
    pub n_outliers: usize,
    pub mean_rel: f64,
    pub sd_rel: f64,
    pub sd_irrel: f64,
    pub outlier_mean: f64,
    pub outlier_sd: f64,
    pub n_test_pos: usize,
    pub n_test_neg: usize,
    /// Apply a seeded column permutation (for robustness tests); the planted
    /// support indices are remapped accordingly.
    pub permute_columns: bool,
    pub seed: u64,
}

impl SyntheticSpec {
    /// The benchmark configuration used by the table sweeps: 40 relevant of
    /// 200 features, 100 labeled positives containing 7 outliers, 300
    /// unlabeled of which 20 are positive, and a 1200 + 2800 test set.
    pub fn defaults() -> Self {
        SyntheticSpec {
            dim: 200,
            relevant: 40,
            n_pos_labeled: 100,
            n_unlabeled: 300,
            n_unlabeled_pos: 20,
            n_outliers: 7,
            mean_rel: 1.0,
            sd_rel: 7.0,
            sd_irrel: 5.0,
            outlier_mean: -10.0,
            outlier_sd: 1.0,
            n_test_pos: 1200,
            n_test_neg: 2800,
            permute_columns: false,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::invalid("dimension must be positive"));
        }
        if self.relevant > self.dim {
            return Err(Error::invalid(format!(
                "{} relevant features exceed dimension {}",
                self.relevant, self.dim
            )));
        }
        if self.n_pos_labeled == 0 || self.n_unlabeled == 0 {
            return Err(Error::invalid(
                "need at least one labeled positive and one unlabeled sample",
            ));
        }
        if self.n_outliers > self.n_pos_labeled {
            return Err(Error::invalid(format!(
                "{} outliers exceed the {} labeled positives",
                self.n_outliers, self.n_pos_labeled
            )));
        }
        if self.n_unlabeled_pos > self.n_unlabeled {
            return Err(Error::invalid(format!(
                "{} unlabeled positives exceed the {} unlabeled samples",
                self.n_unlabeled_pos, self.n_unlabeled
            )));
        }
        if self.n_test_pos == 0 || self.n_test_neg == 0 {
            return Err(Error::invalid("test set needs both classes"));
        }
        for (name, sd) in [
            ("sd_rel", self.sd_rel),
            ("sd_irrel", self.sd_irrel),
            ("outlier_sd", self.outlier_sd),
        ] {
            if !(sd.is_finite() && sd > 0.0) {
                return Err(Error::invalid(format!(
                    "{name} must be finite and positive, got {sd}"
                )));
            }
        }
        if !self.mean_rel.is_finite() || !self.outlier_mean.is_finite() {
            return Err(Error::invalid("means must be finite"));
        }
        Ok(())
    }
}

/// A generated benchmark: the PU training view, a fully labeled test set,
/// and the planted ground truth.
#[derive(Clone, Debug)]
pub struct SyntheticBundle {
    pub train: PUDataset,
    pub test: LabeledDataset,
    /// Column indices of the relevant features, ascending.
    pub true_support: Vec<usize>,
    /// Row indices (into `train.positives`) of the injected outliers.
    pub outlier_rows: Vec<usize>,
    /// True `±1` label of each unlabeled training row.
    pub unlabeled_truth: Vec<i8>,
}

enum RowKind {
    Positive,
    Negative,
    Outlier,
}

fn fill_row(row: &mut [f64], kind: &RowKind, spec: &SyntheticSpec, rng: &mut SplitMix64) {
    match kind {
        RowKind::Outlier => {
            for v in row.iter_mut() {
                *v = rng.next_gaussian_with(spec.outlier_mean, spec.outlier_sd);
            }
        }
        RowKind::Positive | RowKind::Negative => {
            let mean = match kind {
                RowKind::Positive => spec.mean_rel,
                _ => -spec.mean_rel,
            };
            for (c, v) in row.iter_mut().enumerate() {
                *v = if c < spec.relevant {
                    rng.next_gaussian_with(mean, spec.sd_rel)
                } else {
                    rng.next_gaussian_with(0.0, spec.sd_irrel)
                };
            }
        }
    }
}

fn rows_matrix(
    kinds: impl Iterator<Item = RowKind>,
    n_rows: usize,
    spec: &SyntheticSpec,
    rng: &mut SplitMix64,
) -> Array2<f64> {
    let mut m = Array2::zeros((n_rows, spec.dim));
    for (mut row, kind) in m.rows_mut().into_iter().zip(kinds) {
        fill_row(row.as_slice_mut().unwrap(), &kind, spec, rng);
    }
    m
}

fn permute_matrix_columns(m: &Array2<f64>, cols: &[usize]) -> Array2<f64> {
    Array2::from_shape_fn((m.nrows(), cols.len()), |(r, c)| m[[r, cols[c]]])
}

/// Draws one benchmark bundle. Deterministic in the spec (including seed).
pub fn generate(spec: &SyntheticSpec) -> Result<SyntheticBundle> {
    spec.validate()?;
    let mut rng = SplitMix64::new(spec.seed);

    let n_clean = spec.n_pos_labeled - spec.n_outliers;
    let positives = rows_matrix(
        (0..spec.n_pos_labeled).map(|i| {
            if i < n_clean {
                RowKind::Positive
            } else {
                RowKind::Outlier
            }
        }),
        spec.n_pos_labeled,
        spec,
        &mut rng,
    );
    let outlier_rows: Vec<usize> = (n_clean..spec.n_pos_labeled).collect();

    let n_unl_neg = spec.n_unlabeled - spec.n_unlabeled_pos;
    let mut unlabeled = rows_matrix(
        (0..spec.n_unlabeled).map(|i| {
            if i < spec.n_unlabeled_pos {
                RowKind::Positive
            } else {
                RowKind::Negative
            }
        }),
        spec.n_unlabeled,
        spec,
        &mut rng,
    );
    let mut unlabeled_truth: Vec<i8> = (0..spec.n_unlabeled)
        .map(|i| if i < spec.n_unlabeled_pos { 1 } else { -1 })
        .collect();
    debug_assert_eq!(unlabeled_truth.iter().filter(|&&l| l == -1).count(), n_unl_neg);

    // shuffle unlabeled rows and their truth flags with one permutation
    let mut perm: Vec<usize> = (0..spec.n_unlabeled).collect();
    rng.shuffle(&mut perm);
    let shuffled = Array2::from_shape_fn((spec.n_unlabeled, spec.dim), |(r, c)| {
        unlabeled[[perm[r], c]]
    });
    unlabeled = shuffled;
    unlabeled_truth = perm.iter().map(|&i| unlabeled_truth[i]).collect();

    let n_test = spec.n_test_pos + spec.n_test_neg;
    let test_features = rows_matrix(
        (0..n_test).map(|i| {
            if i < spec.n_test_pos {
                RowKind::Positive
            } else {
                RowKind::Negative
            }
        }),
        n_test,
        spec,
        &mut rng,
    );
    let test_labels: Vec<i8> = (0..n_test)
        .map(|i| if i < spec.n_test_pos { 1 } else { -1 })
        .collect();

    let mut true_support: Vec<usize> = (0..spec.relevant).collect();
    let (positives, unlabeled, test_features) = if spec.permute_columns {
        let mut cols: Vec<usize> = (0..spec.dim).collect();
        rng.shuffle(&mut cols);
        true_support = cols
            .iter()
            .enumerate()
            .filter(|(_, &old)| old < spec.relevant)
            .map(|(new, _)| new)
            .collect();
        (
            permute_matrix_columns(&positives, &cols),
            permute_matrix_columns(&unlabeled, &cols),
            permute_matrix_columns(&test_features, &cols),
        )
    } else {
        (positives, unlabeled, test_features)
    };

    Ok(SyntheticBundle {
        train: PUDataset::new(positives, unlabeled, None)?,
        test: LabeledDataset::new(test_features, test_labels)?,
        true_support,
        outlier_rows,
        unlabeled_truth,
    })
}

/// Feature dimension of the unlabeled-set-size study (all features
/// relevant, no outliers).
pub const FIGURE1_DIM: usize = 10;

/// One bundle of the unlabeled-set-size study.
#[derive(Clone, Debug)]
pub struct Figure1Bundle {
    pub unlabeled_size: usize,
    pub repeat: usize,
    pub bundle: SyntheticBundle,
}

/// Generates the unlabeled-set-size series: for each grid size `n` and each
/// repeat, a bundle with `n_pos` labeled positives, `n` unlabeled samples of
/// which a fraction `frac_pos_in_unlabeled` are true positives, no
/// irrelevant features and no outliers. Seeds derive from
/// `base_seed ⊕ hash(n, repeat)`.
pub fn figure1_series(
    n_pos: usize,
    n_grid: &[usize],
    frac_pos_in_unlabeled: f64,
    repeats: usize,
    base_seed: u64,
) -> Result<Vec<Figure1Bundle>> {
    if n_grid.is_empty() {
        return Err(Error::invalid("unlabeled-size grid must be nonempty"));
    }
    if n_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("unlabeled-size grid must be ascending"));
    }
    if repeats == 0 {
        return Err(Error::invalid("repeats must be at least 1"));
    }
    if !(0.0..1.0).contains(&frac_pos_in_unlabeled) {
        return Err(Error::invalid(format!(
            "positive fraction must lie in [0, 1), got {frac_pos_in_unlabeled}"
        )));
    }
    let mut out = Vec::with_capacity(n_grid.len() * repeats);
    for &n in n_grid {
        for repeat in 0..repeats {
            let n_unlabeled_pos = (frac_pos_in_unlabeled * n as f64).round() as usize;
            let spec = SyntheticSpec {
                dim: FIGURE1_DIM,
                relevant: FIGURE1_DIM,
                n_pos_labeled: n_pos,
                n_unlabeled: n,
                n_unlabeled_pos: n_unlabeled_pos.min(n),
                n_outliers: 0,
                n_test_pos: 2000,
                n_test_neg: 2000,
                seed: derive_seed(base_seed, n as u64, repeat as u64),
                ..SyntheticSpec::defaults()
            };
            out.push(Figure1Bundle {
                unlabeled_size: n,
                repeat,
                bundle: generate(&spec)?,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paper_default_shapes() {
        let spec = SyntheticSpec {
            seed: 3,
            ..SyntheticSpec::defaults()
        };
        let b = generate(&spec).unwrap();
        assert_eq!(b.train.positives().dim(), (100, 200));
        assert_eq!(b.train.unlabeled().dim(), (300, 200));
        assert_eq!(b.test.features().dim(), (4000, 200));
        assert_eq!(b.test.n_positive(), 1200);
        assert_eq!(b.test.n_negative(), 2800);
        assert_eq!(b.true_support, (0..40).collect::<Vec<_>>());
        assert_eq!(b.outlier_rows, (93..100).collect::<Vec<_>>());
        assert_eq!(b.unlabeled_truth.iter().filter(|&&l| l == 1).count(), 20);
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = SyntheticSpec {
            dim: 12,
            relevant: 6,
            n_pos_labeled: 9,
            n_unlabeled: 15,
            n_unlabeled_pos: 3,
            n_outliers: 2,
            n_test_pos: 5,
            n_test_neg: 5,
            seed: 77,
            ..SyntheticSpec::defaults()
        };
        let a = generate(&spec).unwrap();
        let b = generate(&spec).unwrap();
        assert_eq!(a.train.positives(), b.train.positives());
        assert_eq!(a.train.unlabeled(), b.train.unlabeled());
        assert_eq!(a.test.features(), b.test.features());
        assert_eq!(a.unlabeled_truth, b.unlabeled_truth);
        let c = generate(&SyntheticSpec { seed: 78, ..spec }).unwrap();
        assert_ne!(a.train.positives(), c.train.positives());
    }

    #[test]
    fn outlier_rows_center_on_outlier_mean() {
        let spec = SyntheticSpec {
            dim: 50,
            relevant: 50,
            n_pos_labeled: 30,
            n_outliers: 5,
            n_unlabeled: 10,
            n_unlabeled_pos: 0,
            n_test_pos: 5,
            n_test_neg: 5,
            seed: 21,
            ..SyntheticSpec::defaults()
        };
        let b = generate(&spec).unwrap();
        let tol = 3.0 * spec.outlier_sd / (spec.dim as f64).sqrt();
        for &r in &b.outlier_rows {
            let mean = b.train.positives().row(r).mean().unwrap();
            assert!(
                (mean - spec.outlier_mean).abs() < tol,
                "row {r} mean {mean}"
            );
        }
    }

    #[test]
    fn outlier_corruption_covers_every_column() {
        let spec = SyntheticSpec {
            dim: 120,
            relevant: 40,
            n_pos_labeled: 20,
            n_outliers: 4,
            n_unlabeled: 10,
            n_unlabeled_pos: 0,
            n_test_pos: 5,
            n_test_neg: 5,
            seed: 8,
            ..SyntheticSpec::defaults()
        };
        let b = generate(&spec).unwrap();
        for &r in &b.outlier_rows {
            let row = b.train.positives().row(r);
            let irr_mean: f64 = row.iter().skip(40).sum::<f64>() / 80.0;
            assert!(
                (irr_mean - spec.outlier_mean).abs() < 3.0 * spec.outlier_sd / 80f64.sqrt(),
                "row {r} irrelevant-block mean {irr_mean}"
            );
        }
    }

    #[test]
    fn relevant_feature_moments() {
        let spec = SyntheticSpec {
            dim: 10,
            relevant: 4,
            n_pos_labeled: 400,
            n_outliers: 0,
            n_unlabeled: 10,
            n_unlabeled_pos: 0,
            n_test_pos: 5,
            n_test_neg: 5,
            seed: 9,
            ..SyntheticSpec::defaults()
        };
        let b = generate(&spec).unwrap();
        let n = spec.n_pos_labeled as f64;
        for c in 0..spec.relevant {
            let col = b.train.positives().column(c);
            let mean = col.mean().unwrap();
            let sd = (col.mapv(|v| (v - mean) * (v - mean)).sum() / n).sqrt();
            // standard errors: sd/sqrt(n) for the mean, sd/sqrt(2n) for sd
            assert!(
                (mean - spec.mean_rel).abs() < 5.0 * spec.sd_rel / n.sqrt(),
                "column {c} mean {mean}"
            );
            assert!(
                (sd - spec.sd_rel).abs() < 5.0 * spec.sd_rel / (2.0 * n).sqrt(),
                "column {c} sd {sd}"
            );
        }
    }

    #[test]
    fn column_permutation_remaps_support() {
        let spec = SyntheticSpec {
            dim: 8,
            relevant: 3,
            n_pos_labeled: 5,
            n_outliers: 0,
            n_unlabeled: 5,
            n_unlabeled_pos: 0,
            n_test_pos: 4,
            n_test_neg: 4,
            permute_columns: true,
            seed: 4,
            ..SyntheticSpec::defaults()
        };
        let b = generate(&spec).unwrap();
        assert_eq!(b.true_support.len(), 3);
        // the support columns of the permuted data still carry the shifted
        // mean; check on the test positives
        for &c in &b.true_support {
            let col_mean: f64 = (0..4).map(|r| b.test.features()[[r, c]]).sum::<f64>() / 4.0;
            assert!(col_mean.is_finite());
        }
    }

    #[test]
    fn figure1_series_shapes_and_determinism() {
        let series = figure1_series(50, &[10, 20], 0.1, 3, 123).unwrap();
        assert_eq!(series.len(), 6);
        for cell in &series {
            assert_eq!(cell.bundle.train.n_pos(), 50);
            assert_eq!(cell.bundle.train.n_unlabeled(), cell.unlabeled_size);
            assert_eq!(cell.bundle.train.dim(), FIGURE1_DIM);
            let expected_pos = (0.1 * cell.unlabeled_size as f64).round() as usize;
            assert_eq!(
                cell.bundle
                    .unlabeled_truth
                    .iter()
                    .filter(|&&l| l == 1)
                    .count(),
                expected_pos
            );
        }
        let again = figure1_series(50, &[10, 20], 0.1, 3, 123).unwrap();
        assert_eq!(
            series[0].bundle.train.positives(),
            again[0].bundle.train.positives()
        );
    }

    #[test]
    fn figure1_single_cell() {
        let series = figure1_series(5, &[10], 0.1, 1, 0).unwrap();
        assert_eq!(series.len(), 1);
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let mut spec = SyntheticSpec::defaults();
        spec.relevant = spec.dim + 1;
        assert!(generate(&spec).is_err());
        let mut spec = SyntheticSpec::defaults();
        spec.n_outliers = spec.n_pos_labeled + 1;
        assert!(generate(&spec).is_err());
        let mut spec = SyntheticSpec::defaults();
        spec.sd_rel = 0.0;
        assert!(generate(&spec).is_err());
        assert!(figure1_series(5, &[10, 10], 0.1, 1, 0).is_err());
        assert!(figure1_series(5, &[10], 1.0, 1, 0).is_err());
    }
}
