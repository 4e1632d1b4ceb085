//! Support-sets and the index-selection primitives shared by every pursuit.
//!
//! Indices are 0-based inside the library. Anything that leaves the process
//! (CSV, fixtures, `Display`) is 1-based.

use std::fmt;

use crate::error::{Error, Result};

/// Ordered set of signal indices, kept sorted ascending without duplicates.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct SupportSet {
    indices: Vec<usize>,
}

impl SupportSet {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds a support-set from 0-based indices, rejecting duplicates and
    /// anything outside `0..n`.
    pub fn new(indices: impl IntoIterator<Item = usize>, n: usize) -> Result<Self> {
        let mut indices: Vec<usize> = indices.into_iter().collect();
        indices.sort_unstable();
        if let Some(w) = indices.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::invalid(format!("duplicate support index {}", w[0] + 1)));
        }
        if let Some(&last) = indices.last() {
            if last >= n {
                return Err(Error::invalid(format!(
                    "support index {} outside 1..={n}",
                    last + 1
                )));
            }
        }
        Ok(Self { indices })
    }

    /// Same as [`SupportSet::new`] but takes the 1-based indices used in
    /// documentation and external files.
    pub fn from_one_based(indices: &[usize], n: usize) -> Result<Self> {
        if indices.contains(&0) {
            return Err(Error::invalid("support index 0 is not valid (indices are 1-based)"));
        }
        Self::new(indices.iter().map(|&i| i - 1), n)
    }

    /// Internal constructor for index lists that are known to be unique.
    pub(crate) fn from_unique(mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        Self { indices }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.indices.binary_search(&index).is_ok()
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = usize> + '_ {
        self.indices.iter().copied()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.indices
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.indices.iter().map(|i| i + 1).collect()
    }

    /// Largest index plus one, i.e. the smallest ambient dimension that can
    /// hold this set.
    pub fn min_dimension(&self) -> usize {
        self.indices.last().map_or(0, |i| i + 1)
    }

    /// Inserts `index`, returning `false` if it was already present.
    pub fn insert(&mut self, index: usize) -> bool {
        match self.indices.binary_search(&index) {
            Ok(_) => false,
            Err(pos) => {
                self.indices.insert(pos, index);
                true
            }
        }
    }

    pub fn union(&self, other: &SupportSet) -> SupportSet {
        let mut out = Vec::with_capacity(self.len() + other.len());
        let (a, b) = (&self.indices, &other.indices);
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
        SupportSet { indices: out }
    }

    pub fn intersection_len(&self, other: &SupportSet) -> usize {
        let (a, b) = (&self.indices, &other.indices);
        let (mut i, mut j, mut count) = (0, 0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    count += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        count
    }

    pub fn is_subset(&self, other: &SupportSet) -> bool {
        self.intersection_len(other) == self.len()
    }
}

impl fmt::Display for SupportSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (pos, i) in self.indices.iter().enumerate() {
            if pos > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}", i + 1)?;
        }
        f.write_str("}")
    }
}

/// Per-index vote counter used by support-set voting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScoreVector {
    scores: Vec<u32>,
}

impl ScoreVector {
    pub fn zeros(n: usize) -> Self {
        Self { scores: vec![0; n] }
    }

    pub fn from_counts(scores: Vec<u32>) -> Self {
        Self { scores }
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.scores
    }

    pub fn total(&self) -> u64 {
        self.scores.iter().map(|&s| u64::from(s)).sum()
    }

    /// Number of indices with at least one vote.
    pub fn nonzero(&self) -> usize {
        self.scores.iter().filter(|&&s| s > 0).count()
    }
}

/// Adds one vote to every index of `support`.
pub fn supp_accumulate(scores: &mut ScoreVector, support: &SupportSet) -> Result<()> {
    if support.min_dimension() > scores.len() {
        return Err(Error::invalid(format!(
            "support index {} outside score vector of length {}",
            support.min_dimension(),
            scores.len()
        )));
    }
    for j in support.iter() {
        scores.scores[j] += 1;
    }
    Ok(())
}

/// Indices of the `k` largest-magnitude entries. Equal magnitudes are
/// resolved in favour of the lower index.
pub fn max_indices(values: &[f64], k: usize) -> Result<SupportSet> {
    if k > values.len() {
        return Err(Error::invalid(format!(
            "cannot select {k} indices from a vector of length {}",
            values.len()
        )));
    }
    Ok(top_k_by(0..values.len(), k, |i| values[i].abs()))
}

/// [`max_indices`] over integer scores.
pub fn max_scores(scores: &ScoreVector, k: usize) -> Result<SupportSet> {
    if k > scores.len() {
        return Err(Error::invalid(format!(
            "cannot select {k} indices from a score vector of length {}",
            scores.len()
        )));
    }
    Ok(top_k_by(0..scores.len(), k, |i| f64::from(scores.scores[i])))
}

/// [`max_indices`] restricted to the members of `candidates`.
pub fn max_indices_within(values: &[f64], candidates: &SupportSet, k: usize) -> Result<SupportSet> {
    if k > candidates.len() {
        return Err(Error::invalid(format!(
            "cannot select {k} indices from {} candidates",
            candidates.len()
        )));
    }
    if candidates.min_dimension() > values.len() {
        return Err(Error::invalid("candidate index outside value vector"));
    }
    Ok(top_k_by(candidates.iter(), k, |i| values[i].abs()))
}

/// Index of the largest-magnitude entry not in `exclude`, lowest index on ties.
pub(crate) fn argmax_excluding(values: &[f64], exclude: &SupportSet) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.iter().enumerate() {
        if exclude.contains(i) {
            continue;
        }
        let mag = v.abs();
        match best {
            Some((_, b)) if mag.total_cmp(&b).is_le() => {}
            _ => best = Some((i, mag)),
        }
    }
    best.map(|(i, _)| i)
}

fn top_k_by(
    candidates: impl Iterator<Item = usize>,
    k: usize,
    key: impl Fn(usize) -> f64,
) -> SupportSet {
    if k == 0 {
        return SupportSet::empty();
    }
    let mut order: Vec<(usize, f64)> = candidates.map(|i| (i, key(i))).collect();
    let by_magnitude = |a: &(usize, f64), b: &(usize, f64)| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0));
    if k < order.len() {
        order.select_nth_unstable_by(k - 1, by_magnitude);
        order.truncate(k);
    }
    SupportSet::from_unique(order.into_iter().map(|(i, _)| i).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_based(s: &SupportSet) -> Vec<usize> {
        s.to_one_based()
    }

    #[test]
    fn max_indices_examples() {
        assert_eq!(one_based(&max_indices(&[0.1, -3.0, 2.0], 2).unwrap()), vec![2, 3]);
        assert!(max_indices(&[0.1, -3.0, 2.0], 0).unwrap().is_empty());
        assert_eq!(one_based(&max_indices(&[1.0, 1.0, 0.0], 1).unwrap()), vec![1]);
        assert!(max_indices(&[1.0], 2).is_err());
    }

    #[test]
    fn max_indices_ties_prefer_low_index() {
        let x = [0.5, -2.0, 2.0, 0.5, 2.0];
        assert_eq!(one_based(&max_indices(&x, 2).unwrap()), vec![2, 3]);
        assert_eq!(one_based(&max_indices(&x, 4).unwrap()), vec![1, 2, 3, 5]);
    }

    #[test]
    fn accumulate_examples() {
        let mut s = ScoreVector::zeros(3);
        supp_accumulate(&mut s, &SupportSet::from_one_based(&[1, 3], 3).unwrap()).unwrap();
        assert_eq!(s.as_slice(), &[1, 0, 1]);

        let mut s = ScoreVector::from_counts(vec![2, 0, 1]);
        supp_accumulate(&mut s, &SupportSet::empty()).unwrap();
        assert_eq!(s.as_slice(), &[2, 0, 1]);

        let mut s = ScoreVector::from_counts(vec![1, 1, 1]);
        supp_accumulate(&mut s, &SupportSet::from_one_based(&[1, 2, 3], 3).unwrap()).unwrap();
        assert_eq!(s.as_slice(), &[2, 2, 2]);
        assert_eq!(s.total(), 6);
    }

    #[test]
    fn accumulate_rejects_out_of_range() {
        let mut s = ScoreVector::zeros(3);
        let t = SupportSet::new([5], 10).unwrap();
        assert!(supp_accumulate(&mut s, &t).is_err());
        assert_eq!(s.as_slice(), &[0, 0, 0]);
    }

    #[test]
    fn construction_validates() {
        assert!(SupportSet::new([1, 1], 4).is_err());
        assert!(SupportSet::new([4], 4).is_err());
        assert!(SupportSet::from_one_based(&[0], 4).is_err());
        let s = SupportSet::from_one_based(&[4, 2], 4).unwrap();
        assert_eq!(s.as_slice(), &[1, 3]);
        assert_eq!(s.to_string(), "{2, 4}");
    }

    #[test]
    fn set_algebra() {
        let a = SupportSet::new([0, 2, 4], 10).unwrap();
        let b = SupportSet::new([2, 3], 10).unwrap();
        assert_eq!(a.union(&b).as_slice(), &[0, 2, 3, 4]);
        assert_eq!(a.intersection_len(&b), 1);
        assert!(SupportSet::new([2], 10).unwrap().is_subset(&a));
        assert!(!b.is_subset(&a));
    }

    #[test]
    fn argmax_skips_excluded() {
        let x = [3.0, -5.0, 5.0, 1.0];
        let none = SupportSet::empty();
        assert_eq!(argmax_excluding(&x, &none), Some(1));
        let ex = SupportSet::new([1], 4).unwrap();
        assert_eq!(argmax_excluding(&x, &ex), Some(2));
        let all = SupportSet::new([0, 1, 2, 3], 4).unwrap();
        assert_eq!(argmax_excluding(&x, &all), None);
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn max_indices_matches_full_sort(x in prop::collection::vec(-5i32..5, 1..40), k_frac in 0.0f64..=1.0) {
                let values: Vec<f64> = x.iter().map(|&v| f64::from(v) * 0.5).collect();
                let k = ((values.len() as f64) * k_frac).floor() as usize;
                let got = max_indices(&values, k).unwrap();
                let mut order: Vec<usize> = (0..values.len()).collect();
                order.sort_by(|&a, &b| values[b].abs().total_cmp(&values[a].abs()).then(a.cmp(&b)));
                let mut expected = order[..k].to_vec();
                expected.sort_unstable();
                prop_assert_eq!(got.as_slice(), &expected[..]);
            }
        }
    }
}
