//! Closed-form Euclidean projections onto the sparsity sets.
//!
//! All three projections are hard-thresholding operators: keep the entries
//! (or whole groups) of largest magnitude, zero the rest. Ties are broken by
//! the lowest index so that every projection is deterministic across
//! platforms.

use crate::error::{Error, Result};
use crate::hypothesis::{GroupPartition, SparsityHypothesis};

/// Result of projecting a vector onto a sparsity set.
#[derive(Clone, Debug)]
pub struct ProjectionReport {
    /// The projected vector.
    pub projected: Vec<f64>,
    /// Retained coordinate indices, ascending. For the group projection this
    /// lists every member of each kept group.
    pub support: Vec<usize>,
    /// Kept group indices (ascending) when projecting onto a group-ℓ0 set.
    pub retained_groups: Option<Vec<usize>>,
    /// `‖input − projected‖₂`.
    pub residual_norm: f64,
}

fn residual_norm(input: &[f64], projected: &[f64]) -> f64 {
    input
        .iter()
        .zip(projected)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

/// Indices of the `keep` largest-magnitude entries of `v` among `candidates`,
/// lowest index first on ties. Returns them sorted ascending.
fn top_magnitude_indices(v: &[f64], candidates: &[usize], keep: usize) -> Vec<usize> {
    let mut order: Vec<usize> = candidates.to_vec();
    order.sort_unstable_by(|&a, &b| {
        v[b].abs()
            .total_cmp(&v[a].abs())
            .then_with(|| a.cmp(&b))
    });
    order.truncate(keep);
    order.sort_unstable();
    order
}

/// Projects onto `{x : ‖x‖₀ ≤ max_nonzeros}` by keeping the largest-magnitude
/// entries. Also serves the outlier-slack budget constraint.
pub fn project_l0(v: &[f64], max_nonzeros: usize) -> Result<ProjectionReport> {
    if max_nonzeros > v.len() {
        return Err(Error::invalid(format!(
            "sparsity budget {max_nonzeros} exceeds vector length {}",
            v.len()
        )));
    }
    let all: Vec<usize> = (0..v.len()).collect();
    let support = top_magnitude_indices(v, &all, max_nonzeros);
    let mut projected = vec![0.0; v.len()];
    for &i in &support {
        projected[i] = v[i];
    }
    Ok(ProjectionReport {
        residual_norm: residual_norm(v, &projected),
        projected,
        support,
        retained_groups: None,
    })
}

/// Projects onto the group-ℓ0 set by keeping intact the `max_groups` groups
/// of largest Euclidean norm. Group ties are broken by the lowest
/// smallest-member index.
pub fn project_group_l0(
    v: &[f64],
    groups: &GroupPartition,
    max_groups: usize,
) -> Result<ProjectionReport> {
    if groups.dim() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: groups.dim(),
            actual: v.len(),
        });
    }
    if max_groups > groups.len() {
        return Err(Error::invalid(format!(
            "group budget {max_groups} exceeds group count {}",
            groups.len()
        )));
    }
    let kept = select_groups(v, groups, max_groups);
    let mut projected = vec![0.0; v.len()];
    let mut support = Vec::new();
    for &g in &kept {
        for &i in &groups.groups()[g] {
            projected[i] = v[i];
            support.push(i);
        }
    }
    support.sort_unstable();
    Ok(ProjectionReport {
        residual_norm: residual_norm(v, &projected),
        projected,
        support,
        retained_groups: Some(kept),
    })
}

/// Kept group indices for the group-ℓ0 projection, sorted ascending.
/// Norm comparisons use squared group norms; the square root is monotone so
/// the selection is identical.
fn select_groups(v: &[f64], groups: &GroupPartition, keep: usize) -> Vec<usize> {
    let sq_norm = |g: &[usize]| g.iter().map(|&i| v[i] * v[i]).sum::<f64>();
    let norms: Vec<f64> = groups.groups().iter().map(|g| sq_norm(g)).collect();
    let mut order: Vec<usize> = (0..groups.len()).collect();
    order.sort_unstable_by(|&a, &b| {
        norms[b]
            .total_cmp(&norms[a])
            .then_with(|| groups.groups()[a][0].cmp(&groups.groups()[b][0]))
    });
    order.truncate(keep);
    order.sort_unstable();
    order
}

/// Projects onto the exclusive set: independently within each group, keeps
/// the `budgets[g]` largest-magnitude entries.
pub fn project_exclusive(
    v: &[f64],
    groups: &GroupPartition,
    budgets: &[usize],
) -> Result<ProjectionReport> {
    if groups.dim() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: groups.dim(),
            actual: v.len(),
        });
    }
    if budgets.len() != groups.len() {
        return Err(Error::invalid(format!(
            "{} budgets for {} groups",
            budgets.len(),
            groups.len()
        )));
    }
    let mut projected = vec![0.0; v.len()];
    let mut support = Vec::new();
    for (g, (group, &budget)) in groups.groups().iter().zip(budgets).enumerate() {
        if budget > group.len() {
            return Err(Error::invalid(format!(
                "budget {budget} exceeds size {} of group {}",
                group.len(),
                g + 1
            )));
        }
        for i in top_magnitude_indices(v, group, budget) {
            projected[i] = v[i];
            support.push(i);
        }
    }
    support.sort_unstable();
    Ok(ProjectionReport {
        residual_norm: residual_norm(v, &projected),
        projected,
        support,
        retained_groups: None,
    })
}

/// Projects onto whichever set the hypothesis describes.
pub fn project_hypothesis(v: &[f64], h: &SparsityHypothesis) -> Result<ProjectionReport> {
    match h {
        SparsityHypothesis::PlainL0 { max_nonzeros, .. } => project_l0(v, *max_nonzeros),
        SparsityHypothesis::GroupL0 { groups, max_groups } => {
            project_group_l0(v, groups, *max_groups)
        }
        SparsityHypothesis::Exclusive { groups, budgets } => {
            project_exclusive(v, groups, budgets)
        }
    }
}

/// In-place hard threshold used by the solver's inner loop; same selection
/// rule as [`project_l0`].
pub(crate) fn l0_in_place(v: &mut [f64], max_nonzeros: usize) {
    if max_nonzeros >= v.len() {
        return;
    }
    let all: Vec<usize> = (0..v.len()).collect();
    let keep = top_magnitude_indices(v, &all, max_nonzeros);
    let mut kept = keep.iter().peekable();
    for i in 0..v.len() {
        if kept.peek() == Some(&&i) {
            kept.next();
        } else {
            v[i] = 0.0;
        }
    }
}

/// In-place projection onto a hypothesis set for the solver's inner loop.
pub(crate) fn hypothesis_in_place(v: &mut [f64], h: &SparsityHypothesis) {
    match h {
        SparsityHypothesis::PlainL0 { max_nonzeros, .. } => l0_in_place(v, *max_nonzeros),
        SparsityHypothesis::GroupL0 { groups, max_groups } => {
            if *max_groups >= groups.len() {
                return;
            }
            let kept = select_groups(v, groups, *max_groups);
            let mut keep_mask = vec![false; v.len()];
            for &g in &kept {
                for &i in &groups.groups()[g] {
                    keep_mask[i] = true;
                }
            }
            for (x, keep) in v.iter_mut().zip(keep_mask) {
                if !keep {
                    *x = 0.0;
                }
            }
        }
        SparsityHypothesis::Exclusive { groups, budgets } => {
            for (group, &budget) in groups.groups().iter().zip(budgets) {
                if budget >= group.len() {
                    continue;
                }
                for i in drop_indices(v, group, budget) {
                    v[i] = 0.0;
                }
            }
        }
    }
}

fn drop_indices(v: &[f64], candidates: &[usize], keep: usize) -> Vec<usize> {
    let kept = top_magnitude_indices(v, candidates, keep);
    candidates
        .iter()
        .filter(|i| kept.binary_search(i).is_err())
        .copied()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: &[f64], b: &[f64]) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert_eq!(x, y, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn plain_keeps_top_magnitudes() {
        let r = project_l0(&[3.0, -1.0, 2.0], 2).unwrap();
        assert_close(&r.projected, &[3.0, 0.0, 2.0]);
        assert_eq!(r.support, vec![0, 2]);
        assert!((r.residual_norm - 1.0).abs() < 1e-15);
    }

    #[test]
    fn plain_full_budget_is_identity() {
        let v = [0.5, -2.0, 0.0, 7.0];
        let r = project_l0(&v, 4).unwrap();
        assert_close(&r.projected, &v);
        assert_eq!(r.residual_norm, 0.0);
    }

    #[test]
    fn plain_ties_break_lowest_index_first() {
        let r = project_l0(&[1.0, -1.0, 1.0], 2).unwrap();
        assert_close(&r.projected, &[1.0, -1.0, 0.0]);
    }

    #[test]
    fn plain_budget_too_large_is_an_error() {
        assert!(project_l0(&[1.0], 2).is_err());
    }

    #[test]
    fn group_keeps_largest_norm_groups() {
        let g = GroupPartition::new(vec![vec![0, 1], vec![2, 3]], 4).unwrap();
        let r = project_group_l0(&[1.0, 1.0, 3.0, 0.0], &g, 1).unwrap();
        assert_close(&r.projected, &[0.0, 0.0, 3.0, 0.0]);
        assert_eq!(r.retained_groups, Some(vec![1]));
        assert_eq!(r.support, vec![2, 3]);
    }

    #[test]
    fn group_full_budget_is_identity() {
        let g = GroupPartition::new(vec![vec![0, 1], vec![2, 3]], 4).unwrap();
        let v = [1.0, 1.0, 3.0, 0.0];
        let r = project_group_l0(&v, &g, 2).unwrap();
        assert_close(&r.projected, &v);
    }

    #[test]
    fn exclusive_example() {
        let g = GroupPartition::new(vec![vec![0, 1, 2], vec![3, 4]], 5).unwrap();
        let r = project_exclusive(&[3.0, 1.0, 2.0, 5.0, 4.0], &g, &[2, 1]).unwrap();
        assert_close(&r.projected, &[3.0, 0.0, 2.0, 5.0, 0.0]);
        assert_eq!(r.support, vec![0, 2, 3]);
    }

    #[test]
    fn exclusive_full_budgets_is_identity() {
        let g = GroupPartition::new(vec![vec![0, 1, 2], vec![3, 4]], 5).unwrap();
        let v = [3.0, 1.0, 2.0, 5.0, 4.0];
        let r = project_exclusive(&v, &g, &[3, 2]).unwrap();
        assert_close(&r.projected, &v);
    }

    #[test]
    fn in_place_matches_report() {
        let v = [0.3, -5.0, 1.2, 1.2, -0.7, 2.0];
        let report = project_l0(&v, 3).unwrap();
        let mut w = v;
        l0_in_place(&mut w, 3);
        assert_close(&w, &report.projected);
    }

    mod properties {
        use super::*;
        use crate::hypothesis::SparsityHypothesis;
        use proptest::prelude::*;

        fn vector(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
            prop::collection::vec(-8i32..=8, 1..=max_len)
                .prop_map(|ks| ks.into_iter().map(|k| k as f64 / 2.0).collect())
        }

        fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
            a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
        }

        /// Minimum squared distance to the plain-ℓ0 set over every support
        /// of the given size, by bitmask enumeration.
        fn brute_l0(v: &[f64], s: usize) -> f64 {
            let p = v.len();
            let mut best = f64::INFINITY;
            for mask in 0u32..(1 << p) {
                if mask.count_ones() as usize != s {
                    continue;
                }
                let off: f64 = (0..p)
                    .filter(|i| mask & (1 << i) == 0)
                    .map(|i| v[i] * v[i])
                    .sum();
                best = best.min(off);
            }
            best
        }

        /// Splits 0..len into contiguous groups of pseudo-random sizes.
        fn make_groups(len: usize, seed: u64) -> GroupPartition {
            let mut rng = crate::rng::SplitMix64::new(seed);
            let mut groups = Vec::new();
            let mut start = 0;
            while start < len {
                let size = (1 + rng.next_below(3.min(len as u64 - start as u64)) as usize)
                    .min(len - start);
                groups.push((start..start + size).collect());
                start += size;
            }
            GroupPartition::new(groups, len).unwrap()
        }

        fn brute_group(v: &[f64], groups: &GroupPartition, s: usize) -> f64 {
            let k = groups.len();
            let mut best = f64::INFINITY;
            for mask in 0u32..(1 << k) {
                if mask.count_ones() as usize != s {
                    continue;
                }
                let off: f64 = groups
                    .groups()
                    .iter()
                    .enumerate()
                    .filter(|(g, _)| mask & (1 << g) == 0)
                    .flat_map(|(_, group)| group.iter().map(|&i| v[i] * v[i]))
                    .sum();
                best = best.min(off);
            }
            best
        }

        proptest! {
            #[test]
            fn plain_is_idempotent_and_optimal(v in vector(12), s_frac in 0.0f64..=1.0) {
                let s = (s_frac * v.len() as f64) as usize;
                let r = project_l0(&v, s).unwrap();
                let again = project_l0(&r.projected, s).unwrap();
                prop_assert_eq!(&again.projected, &r.projected);
                let h = SparsityHypothesis::plain_l0(v.len(), s).unwrap();
                prop_assert!(h.contains(&r.projected).unwrap());
                let dist = sq_dist(&v, &r.projected);
                let best = brute_l0(&v, s);
                prop_assert!(dist <= best + 1e-12, "{dist} > {best}");
                prop_assert!((r.residual_norm * r.residual_norm - dist).abs() < 1e-12);
            }

            #[test]
            fn group_is_idempotent_and_optimal(
                v in vector(12),
                seed in 0u64..500,
                s_frac in 0.0f64..=1.0,
            ) {
                let groups = make_groups(v.len(), seed);
                let s = (s_frac * groups.len() as f64) as usize;
                let r = project_group_l0(&v, &groups, s).unwrap();
                let again = project_group_l0(&r.projected, &groups, s).unwrap();
                prop_assert_eq!(&again.projected, &r.projected);
                let h = SparsityHypothesis::group_l0(groups.clone(), s).unwrap();
                prop_assert!(h.contains(&r.projected).unwrap());
                let dist = sq_dist(&v, &r.projected);
                let best = brute_group(&v, &groups, s);
                prop_assert!(dist <= best + 1e-12, "{dist} > {best}");
            }

            #[test]
            fn exclusive_is_idempotent_optimal_per_group(
                v in vector(12),
                seed in 0u64..500,
                budget_seed in 0u64..500,
            ) {
                let groups = make_groups(v.len(), seed);
                let mut rng = crate::rng::SplitMix64::new(budget_seed);
                let budgets: Vec<usize> = groups
                    .groups()
                    .iter()
                    .map(|g| rng.next_below(g.len() as u64 + 1) as usize)
                    .collect();
                let r = project_exclusive(&v, &groups, &budgets).unwrap();
                let again = project_exclusive(&r.projected, &groups, &budgets).unwrap();
                prop_assert_eq!(&again.projected, &r.projected);
                let h = SparsityHypothesis::exclusive(groups.clone(), budgets.clone()).unwrap();
                prop_assert!(h.contains(&r.projected).unwrap());
                // separable across groups: per-group brute force is exact
                let dist = sq_dist(&v, &r.projected);
                let best: f64 = groups
                    .groups()
                    .iter()
                    .zip(&budgets)
                    .map(|(g, &b)| {
                        let sub: Vec<f64> = g.iter().map(|&i| v[i]).collect();
                        brute_l0(&sub, b)
                    })
                    .sum();
                prop_assert!(dist <= best + 1e-12, "{dist} > {best}");
            }

            #[test]
            fn exclusive_single_group_equals_plain(v in vector(12), s_frac in 0.0f64..=1.0) {
                let s = (s_frac * v.len() as f64) as usize;
                let single = GroupPartition::single(v.len()).unwrap();
                let excl = project_exclusive(&v, &single, &[s]).unwrap();
                let plain = project_l0(&v, s).unwrap();
                prop_assert_eq!(&excl.projected, &plain.projected);
                prop_assert_eq!(&excl.support, &plain.support);
            }

            #[test]
            fn group_singletons_equals_plain(v in vector(12), s_frac in 0.0f64..=1.0) {
                let s = (s_frac * v.len() as f64) as usize;
                let singles = GroupPartition::singletons(v.len());
                let grouped = project_group_l0(&v, &singles, s).unwrap();
                let plain = project_l0(&v, s).unwrap();
                prop_assert_eq!(&grouped.projected, &plain.projected);
            }
        }
    }
}
