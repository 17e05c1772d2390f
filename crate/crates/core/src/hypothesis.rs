//! Sparsity constraint sets for the weight vector.
//!
//! Three hypothesis spaces are supported: a plain ℓ0 ball (at most `s`
//! nonzero weights), a group-ℓ0 ball (at most `s` active groups), and an
//! exclusive set with a per-group nonzero budget. Groups must form a
//! partition of the feature indices; a feature the caller wants exempt from
//! selection belongs in its own always-kept group.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Disjoint groups of 0-based feature indices covering `0..dim`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupPartition {
    groups: Vec<Vec<usize>>,
    dim: usize,
}

impl GroupPartition {
    pub fn new(mut groups: Vec<Vec<usize>>, dim: usize) -> Result<Self> {
        let mut seen = vec![false; dim];
        let mut covered = 0usize;
        for (g, group) in groups.iter_mut().enumerate() {
            if group.is_empty() {
                return Err(Error::invalid(format!("group {} is empty", g + 1)));
            }
            group.sort_unstable();
            for &i in group.iter() {
                if i >= dim {
                    return Err(Error::invalid(format!(
                        "group {} references feature index {} beyond dimension {dim}",
                        g + 1,
                        i + 1
                    )));
                }
                if seen[i] {
                    return Err(Error::invalid(format!(
                        "feature index {} appears in more than one group",
                        i + 1
                    )));
                }
                seen[i] = true;
                covered += 1;
            }
        }
        if covered != dim {
            return Err(Error::invalid(format!(
                "groups cover {covered} of {dim} features; they must form a partition"
            )));
        }
        Ok(GroupPartition { groups, dim })
    }

    /// One singleton group per feature.
    pub fn singletons(dim: usize) -> Self {
        GroupPartition {
            groups: (0..dim).map(|i| vec![i]).collect(),
            dim,
        }
    }

    /// A single group holding every feature.
    pub fn single(dim: usize) -> Result<Self> {
        GroupPartition::new(vec![(0..dim).collect()], dim)
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

/// Constraint set for the weight vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum SparsityHypothesis {
    /// At most `max_nonzeros` nonzero weights.
    PlainL0 { dim: usize, max_nonzeros: usize },
    /// At most `max_groups` groups with any nonzero weight.
    GroupL0 {
        groups: GroupPartition,
        max_groups: usize,
    },
    /// Within each group, at most `budgets[g]` nonzero weights.
    Exclusive {
        groups: GroupPartition,
        budgets: Vec<usize>,
    },
}

impl SparsityHypothesis {
    pub fn plain_l0(dim: usize, max_nonzeros: usize) -> Result<Self> {
        let h = SparsityHypothesis::PlainL0 { dim, max_nonzeros };
        h.validate()?;
        Ok(h)
    }

    pub fn group_l0(groups: GroupPartition, max_groups: usize) -> Result<Self> {
        let h = SparsityHypothesis::GroupL0 { groups, max_groups };
        h.validate()?;
        Ok(h)
    }

    pub fn exclusive(groups: GroupPartition, budgets: Vec<usize>) -> Result<Self> {
        let h = SparsityHypothesis::Exclusive { groups, budgets };
        h.validate()?;
        Ok(h)
    }

    /// The unconstrained hypothesis: every weight may be nonzero.
    pub fn full_support(dim: usize) -> Self {
        SparsityHypothesis::PlainL0 {
            dim,
            max_nonzeros: dim,
        }
    }

    /// Checks the internal invariants; used after construction and after
    /// deserializing a model file.
    pub fn validate(&self) -> Result<()> {
        match self {
            SparsityHypothesis::PlainL0 { dim, max_nonzeros } => {
                if max_nonzeros > dim {
                    return Err(Error::invalid(format!(
                        "sparsity budget {max_nonzeros} exceeds dimension {dim}"
                    )));
                }
            }
            SparsityHypothesis::GroupL0 { groups, max_groups } => {
                if *max_groups > groups.len() {
                    return Err(Error::invalid(format!(
                        "group budget {max_groups} exceeds group count {}",
                        groups.len()
                    )));
                }
            }
            SparsityHypothesis::Exclusive { groups, budgets } => {
                if budgets.len() != groups.len() {
                    return Err(Error::invalid(format!(
                        "{} budgets for {} groups",
                        budgets.len(),
                        groups.len()
                    )));
                }
                for (g, (budget, group)) in budgets.iter().zip(groups.groups()).enumerate() {
                    if *budget > group.len() {
                        return Err(Error::invalid(format!(
                            "budget {budget} exceeds size {} of group {}",
                            group.len(),
                            g + 1
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self {
            SparsityHypothesis::PlainL0 { dim, .. } => *dim,
            SparsityHypothesis::GroupL0 { groups, .. } => groups.dim(),
            SparsityHypothesis::Exclusive { groups, .. } => groups.dim(),
        }
    }

    /// Exact membership test (zero means exactly zero; projections produce
    /// exact zeros by construction).
    pub fn contains(&self, v: &[f64]) -> Result<bool> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: v.len(),
            });
        }
        Ok(match self {
            SparsityHypothesis::PlainL0 { max_nonzeros, .. } => {
                v.iter().filter(|&&x| x != 0.0).count() <= *max_nonzeros
            }
            SparsityHypothesis::GroupL0 { groups, max_groups } => {
                groups
                    .groups()
                    .iter()
                    .filter(|g| g.iter().any(|&i| v[i] != 0.0))
                    .count()
                    <= *max_groups
            }
            SparsityHypothesis::Exclusive { groups, budgets } => groups
                .groups()
                .iter()
                .zip(budgets)
                .all(|(g, &b)| g.iter().filter(|&&i| v[i] != 0.0).count() <= b),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_validation() {
        assert!(GroupPartition::new(vec![vec![0, 1], vec![2, 3]], 4).is_ok());
        // overlap
        assert!(GroupPartition::new(vec![vec![0, 1], vec![1, 2, 3]], 4).is_err());
        // gap
        assert!(GroupPartition::new(vec![vec![0, 1], vec![3]], 4).is_err());
        // out of range
        assert!(GroupPartition::new(vec![vec![0, 1], vec![2, 4]], 4).is_err());
        // empty group
        assert!(GroupPartition::new(vec![vec![0, 1, 2, 3], vec![]], 4).is_err());
    }

    #[test]
    fn budget_validation() {
        assert!(SparsityHypothesis::plain_l0(3, 4).is_err());
        assert!(SparsityHypothesis::plain_l0(3, 3).is_ok());
        let g = GroupPartition::new(vec![vec![0, 1], vec![2]], 3).unwrap();
        assert!(SparsityHypothesis::group_l0(g.clone(), 3).is_err());
        assert!(SparsityHypothesis::exclusive(g.clone(), vec![2, 2]).is_err());
        assert!(SparsityHypothesis::exclusive(g, vec![2, 1]).is_ok());
    }

    #[test]
    fn membership_examples() {
        let h = SparsityHypothesis::plain_l0(3, 1).unwrap();
        assert!(h.contains(&[1.0, 0.0, 0.0]).unwrap());
        assert!(!h.contains(&[1.0, 0.0, 1.0]).unwrap());

        let g = GroupPartition::new(vec![vec![0, 1], vec![2, 3]], 4).unwrap();
        let h = SparsityHypothesis::group_l0(g, 1).unwrap();
        assert!(h.contains(&[1.0, 1.0, 0.0, 0.0]).unwrap());
        assert!(!h.contains(&[1.0, 0.0, 0.5, 0.0]).unwrap());

        let g = GroupPartition::new(vec![vec![0, 1, 2], vec![3, 4]], 5).unwrap();
        let h = SparsityHypothesis::exclusive(g, vec![2, 1]).unwrap();
        assert!(h.contains(&[3.0, 0.0, 2.0, 5.0, 0.0]).unwrap());
        assert!(!h.contains(&[3.0, 1.0, 2.0, 0.0, 0.0]).unwrap());
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let h = SparsityHypothesis::plain_l0(3, 1).unwrap();
        assert!(h.contains(&[1.0, 0.0]).is_err());
    }
}
