//! Finite unions of half-open subintervals of `[0, 1)`.
//!
//! Within one productivity level the workers are indexed by `[0, 1)` with
//! uniform density, so the measure of an [`IndexSet`] is the share of that
//! level's workers it contains.

use std::fmt;

use crate::error::ModelError;
use crate::scalar::{self, Scalar};

/// Half-open interval `[start, end)` with `start < end`.
#[derive(Debug, Clone, PartialEq)]
pub struct Interval<S> {
    pub start: S,
    pub end: S,
}

impl<S: Scalar> Interval<S> {
    pub fn len(&self) -> S {
        self.end.clone() - self.start.clone()
    }
}

/// Sorted, pairwise disjoint, non-adjacent intervals inside `[0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexSet<S> {
    intervals: Vec<Interval<S>>,
}

impl<S: Scalar> Default for IndexSet<S> {
    fn default() -> Self {
        Self::empty()
    }
}

impl<S: Scalar> IndexSet<S> {
    pub fn empty() -> Self {
        Self { intervals: Vec::new() }
    }

    pub fn full() -> Self {
        Self {
            intervals: vec![Interval {
                start: S::zero(),
                end: S::one(),
            }],
        }
    }

    /// `[start, end)`; empty when `start >= end`.
    pub fn interval(start: S, end: S) -> Result<Self, ModelError> {
        Self::from_pairs(vec![(start, end)])
    }

    /// Builds a set from arbitrary pairs, rejecting endpoints outside `[0, 1]`.
    /// Pairs with `start >= end` contribute nothing; overlapping or adjacent
    /// pairs are merged.
    pub fn from_pairs(pairs: Vec<(S, S)>) -> Result<Self, ModelError> {
        let mut intervals = Vec::with_capacity(pairs.len());
        for (start, end) in pairs {
            for x in [&start, &end] {
                if !x.is_finite() || *x < S::zero() || *x > S::one() {
                    return Err(ModelError::IndexOutOfRange(x.to_string()));
                }
            }
            if start < end {
                intervals.push(Interval { start, end });
            }
        }
        Ok(Self::normalized(intervals))
    }

    fn normalized(mut intervals: Vec<Interval<S>>) -> Self {
        intervals.sort_by(|a, b| a.start.partial_cmp(&b.start).expect("finite endpoints"));
        let mut merged: Vec<Interval<S>> = Vec::with_capacity(intervals.len());
        for iv in intervals {
            match merged.last_mut() {
                Some(last) if iv.start <= last.end => {
                    if iv.end > last.end {
                        last.end = iv.end;
                    }
                }
                _ => merged.push(iv),
            }
        }
        Self { intervals: merged }
    }

    pub fn intervals(&self) -> &[Interval<S>] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn measure(&self) -> S {
        self.intervals.iter().fold(S::zero(), |acc, iv| acc + iv.len())
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut all = self.intervals.clone();
        all.extend(other.intervals.iter().cloned());
        Self::normalized(all)
    }

    pub fn intersect(&self, other: &Self) -> Self {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.intervals.len() && j < other.intervals.len() {
            let a = &self.intervals[i];
            let b = &other.intervals[j];
            let start = scalar::max(a.start.clone(), b.start.clone());
            let end = scalar::min(a.end.clone(), b.end.clone());
            if start < end {
                out.push(Interval { start, end });
            }
            if a.end < b.end {
                i += 1;
            } else {
                j += 1;
            }
        }
        Self { intervals: out }
    }

    pub fn complement(&self) -> Self {
        let mut out = Vec::with_capacity(self.intervals.len() + 1);
        let mut cursor = S::zero();
        for iv in &self.intervals {
            if cursor < iv.start {
                out.push(Interval {
                    start: cursor.clone(),
                    end: iv.start.clone(),
                });
            }
            cursor = iv.end.clone();
        }
        if cursor < S::one() {
            out.push(Interval {
                start: cursor,
                end: S::one(),
            });
        }
        Self { intervals: out }
    }

    pub fn subtract(&self, other: &Self) -> Self {
        self.intersect(&other.complement())
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.subtract(other).is_empty()
    }

    pub fn is_disjoint_from(&self, other: &Self) -> bool {
        self.intersect(other).is_empty()
    }

    /// Splits off the leftmost part holding `share` of this set's measure.
    /// `share` is clamped to `[0, 1]`.
    pub fn split_leftmost(&self, share: &S) -> (Self, Self) {
        let total = self.measure();
        let share = scalar::max(S::zero(), scalar::min(share.clone(), S::one()));
        let mut remaining = total * share;
        let mut left = Vec::new();
        let mut right = Vec::new();
        for iv in &self.intervals {
            if remaining <= S::zero() {
                right.push(iv.clone());
                continue;
            }
            let len = iv.len();
            if len <= remaining {
                remaining = remaining - len;
                left.push(iv.clone());
            } else {
                let cut = iv.start.clone() + remaining.clone();
                remaining = S::zero();
                left.push(Interval {
                    start: iv.start.clone(),
                    end: cut.clone(),
                });
                right.push(Interval {
                    start: cut,
                    end: iv.end.clone(),
                });
            }
        }
        (Self::normalized(left), Self::normalized(right))
    }

    /// Endpoint pairs, for serialization.
    pub fn to_pairs(&self) -> Vec<(S, S)> {
        self.intervals
            .iter()
            .map(|iv| (iv.start.clone(), iv.end.clone()))
            .collect()
    }

    pub fn convert<T: Scalar>(&self) -> IndexSet<T> {
        let pairs = self
            .intervals
            .iter()
            .map(|iv| (scalar::convert(&iv.start), scalar::convert(&iv.end)))
            .collect();
        IndexSet::from_pairs(pairs).expect("converted endpoints stay in [0, 1]")
    }
}

impl<S: Scalar> fmt::Display for IndexSet<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.intervals.is_empty() {
            return write!(f, "∅");
        }
        for (i, iv) in self.intervals.iter().enumerate() {
            if i > 0 {
                write!(f, " ∪ ")?;
            }
            write!(f, "[{}, {})", iv.start.render(), iv.end.render())?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Exact;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Exact {
        Exact::ratio(n, d)
    }

    fn set(pairs: &[(i64, i64)], den: i64) -> IndexSet<Exact> {
        IndexSet::from_pairs(pairs.iter().map(|&(a, b)| (q(a, den), q(b, den))).collect()).unwrap()
    }

    #[test]
    fn union_merges_adjacent_halves() {
        let u = set(&[(0, 5)], 10).union(&set(&[(5, 10)], 10));
        assert_eq!(u, IndexSet::full());
        assert_eq!(u.measure(), q(1, 1));
    }

    #[test]
    fn intersection_of_overlapping_intervals() {
        let i = set(&[(0, 6)], 10).intersect(&set(&[(4, 10)], 10));
        assert_eq!(i, set(&[(4, 6)], 10));
        assert_eq!(i.measure(), q(1, 5));
    }

    #[test]
    fn complement_of_middle_interval() {
        let c = set(&[(2, 8)], 10).complement();
        assert_eq!(c, set(&[(0, 2), (8, 10)], 10));
        assert_eq!(c.measure(), q(2, 5));
        assert_eq!(IndexSet::<Exact>::empty().complement(), IndexSet::full());
        assert!(IndexSet::<Exact>::full().complement().is_empty());
    }

    #[test]
    fn subtract_and_subset() {
        let d = IndexSet::full().subtract(&set(&[(1, 3)], 4));
        assert_eq!(d, set(&[(0, 1), (3, 4)], 4));
        assert!(set(&[(1, 2)], 4).is_subset_of(&set(&[(0, 3)], 4)));
        assert!(!set(&[(1, 4)], 4).is_subset_of(&set(&[(0, 3)], 4)));
    }

    #[test]
    fn rejects_out_of_range_endpoints() {
        assert!(IndexSet::from_pairs(vec![(q(-1, 2), q(1, 2))]).is_err());
        assert!(IndexSet::from_pairs(vec![(q(1, 2), q(3, 2))]).is_err());
        assert!(IndexSet::from_pairs(vec![(0.0, f64::NAN)]).is_err());
        // Reversed pairs are empty rather than errors.
        assert!(IndexSet::from_pairs(vec![(q(3, 4), q(1, 4))]).unwrap().is_empty());
    }

    #[test]
    fn leftmost_split_across_intervals() {
        let s = set(&[(0, 2), (4, 8)], 10);
        let (left, right) = s.split_leftmost(&q(1, 2));
        assert_eq!(left, set(&[(0, 2), (4, 5)], 10));
        assert_eq!(right, set(&[(5, 8)], 10));
        let (all, none) = s.split_leftmost(&q(1, 1));
        assert_eq!(all, s);
        assert!(none.is_empty());
    }

    fn arb_set() -> impl Strategy<Value = IndexSet<Exact>> {
        prop::collection::vec((0i64..=32, 0i64..=32), 0..5).prop_map(|pairs| {
            IndexSet::from_pairs(
                pairs
                    .into_iter()
                    .map(|(a, b)| (q(a.min(b), 32), q(a.max(b), 32)))
                    .collect(),
            )
            .unwrap()
        })
    }

    proptest! {
        #[test]
        fn measure_is_additive(a in arb_set(), b in arb_set()) {
            prop_assert_eq!(
                a.measure() + b.measure(),
                a.union(&b).measure() + a.intersect(&b).measure()
            );
            prop_assert_eq!(a.measure() + a.complement().measure(), q(1, 1));
        }

        #[test]
        fn operations_stay_normalized(a in arb_set(), b in arb_set()) {
            for s in [a.union(&b), a.intersect(&b), a.subtract(&b), a.complement()] {
                for w in s.intervals().windows(2) {
                    prop_assert!(w[0].end < w[1].start);
                }
                for iv in s.intervals() {
                    prop_assert!(iv.start < iv.end);
                }
            }
        }

        #[test]
        fn split_parts_partition_the_set(a in arb_set(), k in 0i64..=8) {
            let (l, r) = a.split_leftmost(&q(k, 8));
            prop_assert!(l.is_disjoint_from(&r));
            prop_assert_eq!(l.union(&r), a.clone());
            prop_assert_eq!(l.measure(), a.measure() * q(k, 8));
        }
    }
}
