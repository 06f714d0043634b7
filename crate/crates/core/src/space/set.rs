use std::cmp::Ordering;

use super::MetricMeasureSpace;
use crate::error::Result;

/// A subset of atoms, kept sorted and deduplicated, with its cached measure.
///
/// The mass is always summed in ascending index order so that two sets with the
/// same members carry bit-identical masses.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexSet {
    members: Vec<usize>,
    mass: f64,
}

pub(crate) fn mass_of(weights: &[f64], members: &[usize]) -> f64 {
    members.iter().map(|&j| weights[j]).sum()
}

impl IndexSet {
    /// Builds a set from arbitrary indices (sorted and deduplicated here).
    pub fn new(space: &MetricMeasureSpace, members: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut members: Vec<usize> = members.into_iter().collect();
        members.sort_unstable();
        members.dedup();
        for &m in &members {
            space.check_index(m)?;
        }
        Ok(Self::from_sorted_unchecked(space, members))
    }

    pub(crate) fn from_sorted_unchecked(space: &MetricMeasureSpace, members: Vec<usize>) -> Self {
        debug_assert!(members.windows(2).all(|w| w[0] < w[1]));
        let mass = mass_of(space.weights(), &members);
        Self { members, mass }
    }

    #[inline]
    pub fn members(&self) -> &[usize] {
        &self.members
    }

    /// `mu(A)`.
    #[inline]
    pub fn mass(&self) -> f64 {
        self.mass
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.members.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.members.binary_search(&index).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().copied()
    }

    pub fn is_subset(&self, other: &IndexSet) -> bool {
        self.members.iter().all(|&m| other.contains(m))
    }

    fn merge(&self, other: &IndexSet, keep_left: bool, keep_right: bool, keep_both: bool) -> Vec<usize> {
        let (a, b) = (&self.members, &other.members);
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < a.len() || j < b.len() {
            let ord = match (a.get(i), b.get(j)) {
                (Some(x), Some(y)) => x.cmp(y),
                (Some(_), None) => Ordering::Less,
                (None, _) => Ordering::Greater,
            };
            match ord {
                Ordering::Less => {
                    if keep_left {
                        out.push(a[i]);
                    }
                    i += 1;
                }
                Ordering::Greater => {
                    if keep_right {
                        out.push(b[j]);
                    }
                    j += 1;
                }
                Ordering::Equal => {
                    if keep_both {
                        out.push(a[i]);
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out
    }

    pub fn union(&self, other: &IndexSet, space: &MetricMeasureSpace) -> IndexSet {
        Self::from_sorted_unchecked(space, self.merge(other, true, true, true))
    }

    pub fn intersection(&self, other: &IndexSet, space: &MetricMeasureSpace) -> IndexSet {
        Self::from_sorted_unchecked(space, self.merge(other, false, false, true))
    }

    pub fn difference(&self, other: &IndexSet, space: &MetricMeasureSpace) -> IndexSet {
        Self::from_sorted_unchecked(space, self.merge(other, true, false, false))
    }

    pub fn sym_difference(&self, other: &IndexSet, space: &MetricMeasureSpace) -> IndexSet {
        Self::from_sorted_unchecked(space, self.merge(other, true, true, false))
    }

    /// `mu(self Δ other)` without materializing the set.
    pub fn sym_difference_mass(&self, other: &IndexSet, weights: &[f64]) -> f64 {
        let (a, b) = (&self.members, &other.members);
        let (mut i, mut j) = (0, 0);
        let mut mass = 0.0;
        while i < a.len() || j < b.len() {
            match (a.get(i), b.get(j)) {
                (Some(x), Some(y)) if x == y => {
                    i += 1;
                    j += 1;
                }
                (Some(x), Some(y)) if x < y => {
                    mass += weights[*x];
                    i += 1;
                }
                (Some(x), None) => {
                    mass += weights[*x];
                    i += 1;
                }
                (_, Some(y)) => {
                    mass += weights[*y];
                    j += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        mass
    }
}
