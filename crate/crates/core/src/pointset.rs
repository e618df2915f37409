use serde::{Deserialize, Serialize};

use crate::space::PointId;

/// A finite set of points stored as a sorted, duplicate-free vector.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "Vec<PointId>", into = "Vec<PointId>")]
pub struct PointSet(Vec<PointId>);

impl PointSet {
    pub fn new() -> Self {
        PointSet(Vec::new())
    }

    pub fn singleton(x: PointId) -> Self {
        PointSet(vec![x])
    }

    /// Takes a vector that is already strictly increasing.
    pub(crate) fn from_sorted(v: Vec<PointId>) -> Self {
        debug_assert!(v.windows(2).all(|w| w[0] < w[1]));
        PointSet(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, x: PointId) -> bool {
        self.0.binary_search(&x).is_ok()
    }

    /// Position of `x` in sorted order.
    pub fn index_of(&self, x: PointId) -> Option<usize> {
        self.0.binary_search(&x).ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = PointId> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[PointId] {
        &self.0
    }

    pub fn first(&self) -> Option<PointId> {
        self.0.first().copied()
    }

    pub fn union(&self, other: &PointSet) -> PointSet {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push(a[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        PointSet(out)
    }

    pub fn intersection(&self, other: &PointSet) -> PointSet {
        PointSet(self.0.iter().copied().filter(|&x| other.contains(x)).collect())
    }

    pub fn difference(&self, other: &PointSet) -> PointSet {
        PointSet(self.0.iter().copied().filter(|&x| !other.contains(x)).collect())
    }

    pub fn is_subset(&self, other: &PointSet) -> bool {
        self.first_outside(other).is_none()
    }

    /// Some element of `self` missing from `other`.
    pub fn first_outside(&self, other: &PointSet) -> Option<PointId> {
        self.0.iter().copied().find(|&x| !other.contains(x))
    }

    /// Some element shared with `other`.
    pub fn first_common(&self, other: &PointSet) -> Option<PointId> {
        let (a, b) = (&self.0, &other.0);
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => return Some(a[i]),
            }
        }
        None
    }

    pub fn is_disjoint(&self, other: &PointSet) -> bool {
        self.first_common(other).is_none()
    }
}

impl FromIterator<PointId> for PointSet {
    fn from_iter<I: IntoIterator<Item = PointId>>(iter: I) -> Self {
        let mut v: Vec<PointId> = iter.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        PointSet(v)
    }
}

impl From<Vec<PointId>> for PointSet {
    fn from(v: Vec<PointId>) -> Self {
        v.into_iter().collect()
    }
}

impl From<PointSet> for Vec<PointId> {
    fn from(s: PointSet) -> Self {
        s.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    proptest! {
        #[test]
        fn set_ops_match_btreeset(a in proptest::collection::vec(0usize..40, 0..30),
                                  b in proptest::collection::vec(0usize..40, 0..30)) {
            let (sa, sb): (PointSet, PointSet) = (a.iter().copied().collect(), b.iter().copied().collect());
            let (ta, tb): (BTreeSet<_>, BTreeSet<_>) = (a.into_iter().collect(), b.into_iter().collect());
            prop_assert_eq!(Vec::from(sa.union(&sb)), ta.union(&tb).copied().collect::<Vec<_>>());
            prop_assert_eq!(Vec::from(sa.intersection(&sb)), ta.intersection(&tb).copied().collect::<Vec<_>>());
            prop_assert_eq!(Vec::from(sa.difference(&sb)), ta.difference(&tb).copied().collect::<Vec<_>>());
            prop_assert_eq!(sa.is_subset(&sb), ta.is_subset(&tb));
            prop_assert_eq!(sa.is_disjoint(&sb), ta.is_disjoint(&tb));
        }
    }
}
