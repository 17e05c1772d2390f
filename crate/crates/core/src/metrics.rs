//! Ranking metrics: AUC, blind AUC, the linear AUC↔BAUC relation, and ROC
//! curves.
//!
//! All pairwise rates credit ties one half, so a constant scorer sits at
//! exactly 0.5. Rates are computed from average ranks (Mann-Whitney) in
//! `O(m log m)` instead of enumerating pairs; the two are identical because
//! rank sums count wins plus half-ties exactly.

use crate::dataset::PUDataset;
use crate::error::{Error, Result};
use crate::model::Model;

/// Pairwise win rate of `a` over `b`: `P(a > b) + ½ P(a = b)` over all
/// `(a, b)` pairs, via rank sums.
pub(crate) fn pairwise_win_rate(a: &[f64], b: &[f64]) -> f64 {
    debug_assert!(!a.is_empty() && !b.is_empty());
    let m = a.len() + b.len();
    // (score, is_a)
    let mut tagged: Vec<(f64, bool)> = a
        .iter()
        .map(|&s| (s, true))
        .chain(b.iter().map(|&s| (s, false)))
        .collect();
    tagged.sort_unstable_by(|x, y| x.0.total_cmp(&y.0));
    let mut rank_sum_a = 0.0;
    let mut i = 0;
    while i < m {
        let mut j = i;
        while j < m && tagged[j].0 == tagged[i].0 {
            j += 1;
        }
        // average 1-based rank of the tie block [i, j)
        let avg_rank = (i + 1 + j) as f64 / 2.0;
        let a_in_block = tagged[i..j].iter().filter(|t| t.1).count();
        rank_sum_a += avg_rank * a_in_block as f64;
        i = j;
    }
    let na = a.len() as f64;
    let nb = b.len() as f64;
    (rank_sum_a - na * (na + 1.0) / 2.0) / (na * nb)
}

/// Empirical AUC of `scores` against `±1` labels: the probability that a
/// random positive outscores a random negative, ties credited one half.
pub fn empirical_auc(scores: &[f64], labels: &[i8]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::invalid(format!(
            "{} scores for {} labels",
            scores.len(),
            labels.len()
        )));
    }
    let pos: Vec<f64> = scores
        .iter()
        .zip(labels)
        .filter(|(_, &l)| l == 1)
        .map(|(&s, _)| s)
        .collect();
    let neg: Vec<f64> = scores
        .iter()
        .zip(labels)
        .filter(|(_, &l)| l == -1)
        .map(|(&s, _)| s)
        .collect();
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::SingleClass(format!(
            "AUC needs both classes, got {} positive and {} negative",
            pos.len(),
            neg.len()
        )));
    }
    Ok(pairwise_win_rate(&pos, &neg))
}

/// Empirical blind AUC: every unlabeled sample is treated as negative. The
/// model's slack is ignored; the metric ranks raw scores.
pub fn empirical_bauc(model: &Model, data: &PUDataset) -> Result<f64> {
    let pos = model.score(data.positives())?;
    let unl = model.score(data.unlabeled())?;
    empirical_bauc_from_scores(pos.as_slice().unwrap(), unl.as_slice().unwrap())
}

/// Blind AUC from already-computed scores.
pub fn empirical_bauc_from_scores(pos_scores: &[f64], unl_scores: &[f64]) -> Result<f64> {
    if pos_scores.is_empty() || unl_scores.is_empty() {
        return Err(Error::SingleClass(
            "blind AUC needs at least one positive and one unlabeled score".into(),
        ));
    }
    Ok(pairwise_win_rate(pos_scores, unl_scores))
}

/// Recovers an AUC estimate from a blind AUC via the linear relation
/// `AUC = (BAUC − π/2) / (1 − π)`, where `π` is the fraction of positives
/// among the unlabeled population. No clamping is applied: finite-sample
/// inputs can legitimately map outside `[0, 1]`.
pub fn auc_from_bauc(bauc: f64, pi: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&pi) {
        return Err(Error::invalid(format!(
            "class prior must satisfy 0 <= pi < 1, got {pi}"
        )));
    }
    Ok((bauc - pi / 2.0) / (1.0 - pi))
}

/// Finite-sample decomposition of the blind AUC, for diagnostics on data
/// where the unlabeled samples' true labels are known.
#[derive(Clone, Debug)]
pub struct BaucDecomposition {
    /// Blind AUC of positives against all unlabeled samples.
    pub bauc: f64,
    /// Pairwise rate of positives against the truly negative unlabeled.
    pub auc_vs_true_negatives: f64,
    /// Pairwise rate of positives against the truly positive unlabeled.
    /// Defined as 0.5 when no unlabeled sample is truly positive.
    pub within_positive_rate: f64,
    /// Fraction of unlabeled samples that are truly positive.
    pub pi_hat: f64,
}

/// Splits the blind AUC into its against-negatives and within-positives
/// parts: `bauc = (1 − π̂)·auc_vs_true_negatives + π̂·within_positive_rate`
/// holds to machine precision.
pub fn decompose_bauc(
    pos_scores: &[f64],
    unl_scores: &[f64],
    unlabeled_truth: &[i8],
) -> Result<BaucDecomposition> {
    if unl_scores.len() != unlabeled_truth.len() {
        return Err(Error::invalid(format!(
            "{} unlabeled scores for {} truth flags",
            unl_scores.len(),
            unlabeled_truth.len()
        )));
    }
    if pos_scores.is_empty() || unl_scores.is_empty() {
        return Err(Error::SingleClass(
            "decomposition needs positive and unlabeled scores".into(),
        ));
    }
    if let Some((i, l)) = unlabeled_truth
        .iter()
        .enumerate()
        .find(|(_, l)| !matches!(l, 1 | -1))
    {
        return Err(Error::invalid(format!(
            "truth flag {l} at row {} is not +1 or -1",
            i + 1
        )));
    }
    let true_neg: Vec<f64> = unl_scores
        .iter()
        .zip(unlabeled_truth)
        .filter(|(_, &l)| l == -1)
        .map(|(&s, _)| s)
        .collect();
    let true_pos: Vec<f64> = unl_scores
        .iter()
        .zip(unlabeled_truth)
        .filter(|(_, &l)| l == 1)
        .map(|(&s, _)| s)
        .collect();
    if true_neg.is_empty() {
        return Err(Error::SingleClass(
            "no truly negative unlabeled samples; decomposition undefined".into(),
        ));
    }
    let pi_hat = true_pos.len() as f64 / unl_scores.len() as f64;
    let auc_vs_true_negatives = pairwise_win_rate(pos_scores, &true_neg);
    let within_positive_rate = if true_pos.is_empty() {
        0.5
    } else {
        pairwise_win_rate(pos_scores, &true_pos)
    };
    let bauc = pairwise_win_rate(pos_scores, unl_scores);
    Ok(BaucDecomposition {
        bauc,
        auc_vs_true_negatives,
        within_positive_rate,
        pi_hat,
    })
}

/// ROC curve over the distinct score thresholds, plus its trapezoidal area.
#[derive(Clone, Debug)]
pub struct RocCurve {
    /// Decision thresholds, descending; the first is `+∞` so the curve
    /// starts at (0, 0). A sample is called positive when `score >= t`.
    pub thresholds: Vec<f64>,
    pub tpr: Vec<f64>,
    pub fpr: Vec<f64>,
    pub auc: f64,
}

/// Standard threshold sweep over the distinct score values. The trapezoidal
/// area equals [`empirical_auc`] (same half-credit tie convention).
pub fn roc_curve(scores: &[f64], labels: &[i8]) -> Result<RocCurve> {
    if scores.len() != labels.len() {
        return Err(Error::invalid(format!(
            "{} scores for {} labels",
            scores.len(),
            labels.len()
        )));
    }
    let n_pos = labels.iter().filter(|&&l| l == 1).count();
    let n_neg = labels.iter().filter(|&&l| l == -1).count();
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass(format!(
            "ROC needs both classes, got {n_pos} positive and {n_neg} negative"
        )));
    }
    if let Some((i, l)) = labels.iter().enumerate().find(|(_, l)| !matches!(l, 1 | -1)) {
        return Err(Error::invalid(format!(
            "label {l} at row {} is not +1 or -1",
            i + 1
        )));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_unstable_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut thresholds = vec![f64::INFINITY];
    let mut tpr = vec![0.0];
    let mut fpr = vec![0.0];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let threshold = scores[order[i]];
        let mut j = i;
        while j < order.len() && scores[order[j]] == threshold {
            if labels[order[j]] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
            j += 1;
        }
        thresholds.push(threshold);
        tpr.push(tp as f64 / n_pos as f64);
        fpr.push(fp as f64 / n_neg as f64);
        i = j;
    }
    let auc = trapezoid(&fpr, &tpr);
    Ok(RocCurve {
        thresholds,
        tpr,
        fpr,
        auc,
    })
}

/// Trapezoidal area under a piecewise-linear curve given as parallel x/y
/// vectors.
pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| (xs[1] - xs[0]) * (ys[0] + ys[1]) / 2.0)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    /// Independent O(n²) oracle: enumerate every (positive, negative) pair.
    fn pairwise_oracle(a: &[f64], b: &[f64]) -> f64 {
        let mut total = 0.0;
        for &sa in a {
            for &sb in b {
                total += if sa > sb {
                    1.0
                } else if sa == sb {
                    0.5
                } else {
                    0.0
                };
            }
        }
        total / (a.len() * b.len()) as f64
    }

    #[test]
    fn auc_perfect_separation() {
        let auc = empirical_auc(&[0.9, 0.8, 0.2, 0.1], &[1, 1, -1, -1]).unwrap();
        assert_eq!(auc, 1.0);
    }

    #[test]
    fn auc_tie_gets_half_credit() {
        let auc = empirical_auc(&[0.5, 0.5], &[1, -1]).unwrap();
        assert_eq!(auc, 0.5);
    }

    #[test]
    fn auc_three_sample_case() {
        // pairs: (0.5 > 0.3) = 1, (0.5 < 0.6) = 0 -> mean 0.5
        let auc = empirical_auc(&[0.5, 0.3, 0.6], &[1, -1, -1]).unwrap();
        assert_eq!(auc, pairwise_oracle(&[0.5], &[0.3, 0.6]));
        assert_eq!(auc, 0.5);
    }

    #[test]
    fn auc_single_class_is_an_error() {
        assert!(empirical_auc(&[0.1, 0.2], &[1, 1]).is_err());
    }

    #[test]
    fn rank_method_matches_pair_enumeration() {
        let mut rng = SplitMix64::new(11);
        for _ in 0..200 {
            let na = 1 + rng.next_below(12) as usize;
            let nb = 1 + rng.next_below(12) as usize;
            // quantized scores so ties happen often
            let a: Vec<f64> = (0..na).map(|_| rng.next_below(6) as f64 / 2.0).collect();
            let b: Vec<f64> = (0..nb).map(|_| rng.next_below(6) as f64 / 2.0).collect();
            let fast = pairwise_win_rate(&a, &b);
            let slow = pairwise_oracle(&a, &b);
            assert!((fast - slow).abs() < 1e-12, "{fast} vs {slow}");
        }
    }

    #[test]
    fn bauc_examples() {
        // positives all higher
        assert_eq!(
            empirical_bauc_from_scores(&[2.0, 3.0], &[0.0, 1.0]).unwrap(),
            1.0
        );
        // all scores equal: every pair ties
        assert_eq!(
            empirical_bauc_from_scores(&[0.0, 0.0], &[0.0, 0.0, 0.0]).unwrap(),
            0.5
        );
        // {1, 0} vs {0.5}: one win, one loss
        assert_eq!(
            empirical_bauc_from_scores(&[1.0, 0.0], &[0.5]).unwrap(),
            0.5
        );
    }

    #[test]
    fn auc_from_bauc_examples() {
        assert_eq!(auc_from_bauc(0.75, 0.0).unwrap(), 0.75);
        assert!((auc_from_bauc(0.75, 0.5).unwrap() - 1.0).abs() < 1e-15);
        assert!((auc_from_bauc(0.9, 0.2).unwrap() - 1.0).abs() < 1e-15);
        assert!(auc_from_bauc(0.5, 1.0).is_err());
        assert!(auc_from_bauc(0.5, -0.1).is_err());
    }

    #[test]
    fn decompose_all_negative_unlabeled() {
        let d = decompose_bauc(&[1.0, 0.2], &[0.5, 0.1, 0.9], &[-1, -1, -1]).unwrap();
        assert_eq!(d.pi_hat, 0.0);
        assert_eq!(d.bauc, d.auc_vs_true_negatives);
        assert_eq!(d.within_positive_rate, 0.5);
    }

    #[test]
    fn decompose_four_pair_example() {
        let d = decompose_bauc(&[1.0, 1.0], &[0.0, 2.0], &[-1, 1]).unwrap();
        assert_eq!(d.pi_hat, 0.5);
        assert_eq!(d.auc_vs_true_negatives, 1.0);
        assert_eq!(d.within_positive_rate, 0.0);
        assert_eq!(d.bauc, 0.5);
    }

    #[test]
    fn decompose_identity_on_random_instances() {
        let mut rng = SplitMix64::new(77);
        for _ in 0..200 {
            let np = 1 + rng.next_below(20) as usize;
            let nu = 2 + rng.next_below(20) as usize;
            let pos: Vec<f64> = (0..np).map(|_| rng.next_gaussian()).collect();
            let unl: Vec<f64> = (0..nu).map(|_| rng.next_gaussian()).collect();
            let mut truth: Vec<i8> = (0..nu)
                .map(|_| if rng.next_f64() < 0.3 { 1 } else { -1 })
                .collect();
            truth[0] = -1; // at least one true negative
            let d = decompose_bauc(&pos, &unl, &truth).unwrap();
            let recomposed = (1.0 - d.pi_hat) * d.auc_vs_true_negatives
                + d.pi_hat * d.within_positive_rate;
            assert!((d.bauc - recomposed).abs() < 1e-12);
        }
    }

    #[test]
    fn decompose_requires_a_true_negative() {
        assert!(decompose_bauc(&[1.0], &[0.5], &[1]).is_err());
    }

    #[test]
    fn roc_perfect_separation() {
        let c = roc_curve(&[0.9, 0.8, 0.2, 0.1], &[1, 1, -1, -1]).unwrap();
        assert_eq!(c.auc, 1.0);
        // passes through (0, 1)
        assert!(c
            .fpr
            .iter()
            .zip(&c.tpr)
            .any(|(&f, &t)| f == 0.0 && t == 1.0));
        assert_eq!((c.fpr[0], c.tpr[0]), (0.0, 0.0));
        assert_eq!(
            (*c.fpr.last().unwrap(), *c.tpr.last().unwrap()),
            (1.0, 1.0)
        );
    }

    #[test]
    fn roc_constant_scores_is_diagonal() {
        let c = roc_curve(&[0.3, 0.3, 0.3], &[1, -1, -1]).unwrap();
        assert_eq!(c.thresholds.len(), 2);
        assert_eq!(c.auc, 0.5);
    }

    #[test]
    fn roc_auc_matches_pairwise_on_mixed_instance() {
        let scores = [0.1, 0.4, 0.35, 0.8, 0.4, 0.7];
        let labels = [-1, 1, -1, 1, -1, 1];
        let c = roc_curve(&scores, &labels).unwrap();
        let pos: Vec<f64> = [0.4, 0.8, 0.7].to_vec();
        let neg: Vec<f64> = [0.1, 0.35, 0.4].to_vec();
        let oracle = pairwise_oracle(&pos, &neg);
        assert!((c.auc - oracle).abs() < 1e-10, "{} vs {oracle}", c.auc);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        /// Scores on a quarter-integer grid so that the affine map
        /// `z ↦ 3z + 7` is exact in floating point (no spurious ties made
        /// or broken).
        fn quarter_scores(len: std::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
            prop::collection::vec(-400i32..=400, len)
                .prop_map(|ks| ks.into_iter().map(|k| k as f64 / 4.0).collect())
        }

        fn labels_for(n: usize) -> impl Strategy<Value = Vec<i8>> {
            prop::collection::vec(prop::bool::ANY, n).prop_map(|mut bs| {
                // force both classes to be present
                if bs.len() >= 2 {
                    bs[0] = true;
                    bs[1] = false;
                }
                bs.into_iter().map(|b| if b { 1 } else { -1 }).collect()
            })
        }

        fn pairwise_oracle(a: &[f64], b: &[f64]) -> f64 {
            super::pairwise_oracle(a, b)
        }

        proptest! {
            #[test]
            fn monotone_transform_leaves_metrics_unchanged(
                scores in quarter_scores(2..14),
                seed in 0u64..1000,
            ) {
                let labels = {
                    let mut rng = SplitMix64::new(seed);
                    let mut l: Vec<i8> = (0..scores.len())
                        .map(|_| if rng.next_f64() < 0.5 { 1 } else { -1 })
                        .collect();
                    l[0] = 1;
                    l[1] = -1;
                    l
                };
                let mapped: Vec<f64> = scores.iter().map(|&z| 3.0 * z + 7.0).collect();
                prop_assert_eq!(
                    empirical_auc(&scores, &labels).unwrap(),
                    empirical_auc(&mapped, &labels).unwrap()
                );
                let pos: Vec<f64> = scores.iter().zip(&labels).filter(|(_, &l)| l == 1).map(|(&s, _)| s).collect();
                let unl: Vec<f64> = scores.iter().zip(&labels).filter(|(_, &l)| l == -1).map(|(&s, _)| s).collect();
                let pos_m: Vec<f64> = pos.iter().map(|&z| 3.0 * z + 7.0).collect();
                let unl_m: Vec<f64> = unl.iter().map(|&z| 3.0 * z + 7.0).collect();
                prop_assert_eq!(
                    empirical_bauc_from_scores(&pos, &unl).unwrap(),
                    empirical_bauc_from_scores(&pos_m, &unl_m).unwrap()
                );
                prop_assert_eq!(
                    roc_curve(&scores, &labels).unwrap().auc,
                    roc_curve(&mapped, &labels).unwrap().auc
                );
            }

            #[test]
            fn decomposition_identity_holds(
                pos in quarter_scores(1..10),
                unl in quarter_scores(1..10),
                seed in 0u64..1000,
            ) {
                let truth: Vec<i8> = {
                    let mut rng = SplitMix64::new(seed);
                    let mut t: Vec<i8> = (0..unl.len())
                        .map(|_| if rng.next_f64() < 0.4 { 1 } else { -1 })
                        .collect();
                    t[0] = -1;
                    t
                };
                let d = decompose_bauc(&pos, &unl, &truth).unwrap();
                let recomposed =
                    (1.0 - d.pi_hat) * d.auc_vs_true_negatives + d.pi_hat * d.within_positive_rate;
                prop_assert!((d.bauc - recomposed).abs() < 1e-12);
            }

            #[test]
            fn bauc_map_inverts_exactly(auc in 0.0f64..=1.0, pi in 0.0f64..=0.99) {
                let forward = (1.0 - pi) * auc + pi / 2.0;
                let back = auc_from_bauc(forward, pi).unwrap();
                prop_assert!((back - auc).abs() < 1e-12);
            }

            #[test]
            fn roc_auc_equals_pairwise_auc(
                scores in quarter_scores(2..20),
                seed in 0u64..1000,
            ) {
                let labels = {
                    let mut rng = SplitMix64::new(seed);
                    let mut l: Vec<i8> = (0..scores.len())
                        .map(|_| if rng.next_f64() < 0.5 { 1 } else { -1 })
                        .collect();
                    l[0] = 1;
                    l[1] = -1;
                    l
                };
                let roc = roc_curve(&scores, &labels).unwrap();
                let auc = empirical_auc(&scores, &labels).unwrap();
                prop_assert!((roc.auc - auc).abs() < 1e-10);
            }

            #[test]
            fn duplicating_a_negative_matches_the_pairwise_definition(
                scores in quarter_scores(2..8),
                labels_seed in 0u64..1000,
                pick in 0usize..8,
            ) {
                let labels = {
                    let mut rng = SplitMix64::new(labels_seed);
                    let mut l: Vec<i8> = (0..scores.len())
                        .map(|_| if rng.next_f64() < 0.5 { 1 } else { -1 })
                        .collect();
                    l[0] = 1;
                    l[1] = -1;
                    l
                };
                // base instance agrees with the enumeration oracle
                let pos: Vec<f64> = scores.iter().zip(&labels).filter(|(_, &l)| l == 1).map(|(&s, _)| s).collect();
                let neg: Vec<f64> = scores.iter().zip(&labels).filter(|(_, &l)| l == -1).map(|(&s, _)| s).collect();
                prop_assert!((empirical_auc(&scores, &labels).unwrap() - pairwise_oracle(&pos, &neg)).abs() < 1e-12);

                // append a copy of one existing negative; the oracle defines
                // the new value
                let neg_positions: Vec<usize> =
                    labels.iter().enumerate().filter(|(_, &l)| l == -1).map(|(i, _)| i).collect();
                let dup = neg_positions[pick % neg_positions.len()];
                let mut scores2 = scores.clone();
                let mut labels2 = labels.clone();
                scores2.push(scores[dup]);
                labels2.push(-1);
                let mut neg2 = neg.clone();
                neg2.push(scores[dup]);
                prop_assert!(
                    (empirical_auc(&scores2, &labels2).unwrap() - pairwise_oracle(&pos, &neg2)).abs()
                        < 1e-12
                );
            }
        }
    }

    #[test]
    fn roc_is_monotone() {
        let mut rng = SplitMix64::new(3);
        for _ in 0..50 {
            let n = 4 + rng.next_below(30) as usize;
            let scores: Vec<f64> = (0..n).map(|_| rng.next_below(8) as f64).collect();
            let mut labels: Vec<i8> = (0..n)
                .map(|_| if rng.next_f64() < 0.5 { 1 } else { -1 })
                .collect();
            labels[0] = 1;
            labels[1] = -1;
            let c = roc_curve(&scores, &labels).unwrap();
            for w in c.tpr.windows(2) {
                assert!(w[1] >= w[0]);
            }
            for w in c.fpr.windows(2) {
                assert!(w[1] >= w[0]);
            }
            for w in c.thresholds.windows(2) {
                assert!(w[1] < w[0]);
            }
            let auc = empirical_auc(&scores, &labels).unwrap();
            assert!((c.auc - auc).abs() < 1e-10);
        }
    }
}
